//! Executable cost-ratio certificates built from shortcut nodes.
//!
//! Along the plain agent's path `P`, a *shortcut node* `u_i` is one whose
//! successor `u_i'` on `P` is not on any min-cost path, i.e.
//! `c(u_i, u_i') + d(u_i') > d(u_i)`. For each one we keep the canonical
//! min-cost path `P_i`, its second node `v_i`, and the point `w_i` where
//! `P_i` first rejoins `P`. The position of `w_i` relative to the shortcut
//! nodes gives an index `t_i` (integer, half-integer, or `n + 1`), and the
//! sets `S_i = { j < i : t_j >= i }` drive the coefficient recursion
//!
//! ```text
//! a_1 = 1
//! b_i = a_i + sum_{t_j = i} (1 - beta) b_j
//! a_{i+1} = beta b_i + sum_{i < t_j < i+1} (1 - beta) b_j
//! ```
//!
//! whose weighted segment costs lower-bound `d(s)`. Since every coefficient
//! is at least `beta^{|S_i|}`, the walk costs at most `beta^{-max |S_i|}`
//! times the optimum.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::agent::{simulate_plain, AgentConfig, AgentError};
use crate::graph::{EdgeId, NodeId, TaskGraph};
use crate::rational::{int, pow, ratio, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortcut {
    pub node: NodeId,
    pub via: NodeId,
    pub merge: NodeId,
    pub min_path: Vec<NodeId>,
    /// Integer `j`, half-integer `j + 1/2`, or `n + 1`.
    pub t: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortcutCertificate {
    pub beta: Rational,
    pub path: Vec<NodeId>,
    pub shortcuts: Vec<Shortcut>,
    /// `S_1 ..= S_{n+1}`, holding 1-based shortcut indices.
    pub s_sets: Vec<Vec<usize>>,
    /// `a_1 ..= a_{n+1}`.
    pub a: Vec<Rational>,
    /// `b_1 ..= b_n`.
    pub b: Vec<Rational>,
    positions: Vec<usize>,
    prefix: Vec<Rational>,
}

impl ShortcutCertificate {
    pub fn n(&self) -> usize {
        self.shortcuts.len()
    }

    pub fn max_s(&self) -> usize {
        self.s_sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Position on `P` of the `i`-th shortcut node (1-based).
    pub fn position(&self, i: usize) -> usize {
        self.positions[i - 1]
    }

    /// Cost along `P` between two positions.
    fn segment(&self, from: usize, to: usize) -> Rational {
        &self.prefix[to] - &self.prefix[from]
    }

    pub fn path_cost(&self) -> Rational {
        self.prefix.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn render(&self, g: &TaskGraph) -> String {
        let mut out = String::new();
        let ids: Vec<&str> = self.path.iter().map(|&v| g.id(v)).collect();
        writeln!(out, "path {}", ids.join(" ")).unwrap();
        for sc in &self.shortcuts {
            writeln!(
                out,
                "shortcut {} via {} merge {} t={}",
                g.id(sc.node),
                g.id(sc.via),
                g.id(sc.merge),
                Frac(&sc.t)
            )
            .unwrap();
        }
        for (i, s) in self.s_sets.iter().enumerate() {
            let items: Vec<String> = s.iter().map(usize::to_string).collect();
            writeln!(out, "S_{} {{{}}}", i + 1, items.join(",")).unwrap();
        }
        for (i, a) in self.a.iter().enumerate() {
            writeln!(out, "a_{} {}", i + 1, Frac(a)).unwrap();
        }
        for (i, b) in self.b.iter().enumerate() {
            writeln!(out, "b_{} {}", i + 1, Frac(b)).unwrap();
        }
        writeln!(out, "bound {}", Frac(&certified_lower_bound(self))).unwrap();
        writeln!(out, "ratio_bound {}", Frac(&ratio_bound(self))).unwrap();
        out
    }
}

/// Simulates the plain agent and extracts its shortcut certificate.
pub fn analyze(g: &TaskGraph, cfg: &AgentConfig) -> Result<ShortcutCertificate, AgentError> {
    let traj = simulate_plain(g, cfg)?;
    let path = traj.nodes;
    let d = g.dist_to_target();
    let pos_of: HashMap<NodeId, usize> = path.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut prefix = vec![Rational::zero()];
    for pair in path.windows(2) {
        let e = g.find_edge(pair[0], pair[1]).expect("walk follows edges");
        let next = prefix.last().unwrap() + &g.edge(e).cost;
        prefix.push(next);
    }

    let mut positions = Vec::new();
    let mut raw = Vec::new();
    for p in 0..path.len().saturating_sub(1) {
        let (u, succ) = (path[p], path[p + 1]);
        let step = &prefix[p + 1] - &prefix[p];
        let du = d[u].as_ref().expect("on a reaching walk");
        let dsucc = d[succ].as_ref().expect("on a reaching walk");
        if step + dsucc == *du {
            continue;
        }
        let min_path = g.min_cost_path(u, g.target()).expect("reachable");
        let merge_pos = min_path[1..]
            .iter()
            .find_map(|v| pos_of.get(v).copied())
            .expect("min-cost path ends at t, which is on P");
        positions.push(p);
        raw.push((u, min_path, merge_pos));
    }

    let n = raw.len();
    let t_index = |merge_pos: usize| -> Rational {
        if let Some(j) = positions.iter().position(|&q| q == merge_pos) {
            return int(j as i64 + 1);
        }
        if let Some(j) = positions.iter().position(|&q| q + 1 == merge_pos) {
            return ratio(2 * (j as i64 + 1) + 1, 2);
        }
        match positions.iter().position(|&q| q > merge_pos) {
            Some(j) => int(j as i64 + 1),
            None => int(n as i64 + 1),
        }
    };
    let shortcuts: Vec<Shortcut> = raw
        .into_iter()
        .map(|(u, min_path, merge_pos)| Shortcut {
            node: u,
            via: min_path[1],
            merge: path[merge_pos],
            t: t_index(merge_pos),
            min_path,
        })
        .collect();

    let s_sets = (1..=n + 1)
        .map(|i| (1..i).filter(|&j| shortcuts[j - 1].t >= int(i as i64)).collect())
        .collect();
    let (a, b) = coefficients(&cfg.beta, &shortcuts);
    Ok(ShortcutCertificate { beta: cfg.beta.clone(), path, shortcuts, s_sets, a, b, positions, prefix })
}

fn coefficients(beta: &Rational, shortcuts: &[Shortcut]) -> (Vec<Rational>, Vec<Rational>) {
    let n = shortcuts.len();
    let slack = Rational::one() - beta;
    let mut a = vec![Rational::one()];
    let mut b: Vec<Rational> = Vec::with_capacity(n);
    for i in 1..=n {
        let (lo, hi) = (int(i as i64), int(i as i64 + 1));
        let mut bi = a[i - 1].clone();
        for (j, sc) in shortcuts.iter().enumerate().take(i - 1) {
            if sc.t == lo {
                bi += &slack * &b[j];
            }
        }
        b.push(bi);
        let mut next = beta * &b[i - 1];
        for (j, sc) in shortcuts.iter().enumerate().take(i) {
            if sc.t > lo && sc.t < hi {
                next += &slack * &b[j];
            }
        }
        a.push(next);
    }
    (a, b)
}

/// Weighted segment sum
/// `sum_j (a_j c(u_{j-1}', u_j) + b_j c(u_j, u_j')) + a_{n+1} c(u_n', t)`
/// with `u_0' = s`; never exceeds `d(s)`.
pub fn certified_lower_bound(cert: &ShortcutCertificate) -> Rational {
    let mut total = Rational::zero();
    let mut prev = 0;
    for i in 1..=cert.n() {
        let p = cert.position(i);
        total += &cert.a[i - 1] * cert.segment(prev, p);
        total += &cert.b[i - 1] * cert.segment(p, p + 1);
        prev = p + 1;
    }
    let last = cert.path.len() - 1;
    total += &cert.a[cert.n()] * cert.segment(prev, last);
    total
}

/// `beta^{-max_i |S_i|}`, an upper bound on the cost ratio.
pub fn ratio_bound(cert: &ShortcutCertificate) -> Rational {
    pow(&cert.beta, -(cert.max_s() as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateViolation {
    #[error("t_{0} < {0} + 1")]
    IndexOrder(usize),
    #[error("b_{0} >= a_{0} >= beta^|S_{0}| fails")]
    CoefficientBound(usize),
    #[error("running-sum identity fails at m = {0}")]
    RunningSum(usize),
    #[error("a_{0} + sum_(S_{0}) (1-beta) b_j != 1")]
    UnitSum(usize),
}

/// Re-derives every algebraic fact the bound rests on, exactly.
pub fn check_identities(cert: &ShortcutCertificate) -> Result<(), CertificateViolation> {
    let n = cert.n();
    let beta = &cert.beta;
    let slack = Rational::one() - beta;
    for (i, sc) in cert.shortcuts.iter().enumerate() {
        if sc.t < int(i as i64 + 2) {
            return Err(CertificateViolation::IndexOrder(i + 1));
        }
    }
    for i in 1..=n + 1 {
        let floor = pow(beta, cert.s_sets[i - 1].len() as i64);
        let a_ok = cert.a[i - 1] >= floor;
        let b_ok = i > n || cert.b[i - 1] >= cert.a[i - 1];
        if !(a_ok && b_ok) {
            return Err(CertificateViolation::CoefficientBound(i));
        }
    }
    let x = |j: usize| cert.b[j - 1].clone();
    let sum_over = |set: &[usize], pred: &dyn Fn(usize) -> bool| {
        set.iter().filter(|&&j| pred(j)).fold(Rational::zero(), |acc, &j| acc + x(j))
    };
    for m in 2..=n + 1 {
        let lhs = sum_over(&cert.s_sets[m - 1], &|_| true);
        let rhs = x(m - 1)
            + sum_over(&cert.s_sets[m - 2], &|j| cert.shortcuts[j - 1].t >= int(m as i64));
        if lhs != rhs {
            return Err(CertificateViolation::RunningSum(m));
        }
    }
    for m in 1..=n + 1 {
        let total = &cert.a[m - 1] + &slack * sum_over(&cert.s_sets[m - 1], &|_| true);
        if !total.is_one() {
            return Err(CertificateViolation::UnitSum(m));
        }
    }
    Ok(())
}

/// Which `F_k` adjacency a connecting edge witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FanEdge {
    /// `v_l -- v_{l+1}` (1-based `l`).
    Path(usize),
    /// `v_l -- w`.
    Spoke(usize),
}

/// Branch sets realizing `F_k` as a minor of the skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorWitness {
    pub k: usize,
    /// `U_1 ..= U_k`, images of the fan's path nodes.
    pub branch_sets: Vec<BTreeSet<NodeId>>,
    /// Image of the hub.
    pub hub: BTreeSet<NodeId>,
    pub connecting_edges: Vec<(FanEdge, EdgeId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinorError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid witness: {0}")]
    Invalid(String),
}

/// Builds an `F_k` witness (`k = anchors.len() + 1`) from a path `P`,
/// anchors `u_1 < ... < u_{k-1}` on it, a node `u_k` after the last anchor,
/// and for each anchor a path leaving it whose first return to `P` lies
/// strictly after `u_k`.
///
/// `U_l` is the `P`-segment `[u_l, u_{l+1})`, `U_k = {u_k}`, and the hub is
/// the union of the detours (return point included) with the part of `P`
/// after `u_k`.
pub fn build_minor_witness(
    g: &TaskGraph,
    path: &[NodeId],
    anchors: &[NodeId],
    last: NodeId,
    detours: &[Vec<NodeId>],
) -> Result<MinorWitness, MinorError> {
    let bad = |m: String| Err(MinorError::PreconditionViolated(m));
    if anchors.is_empty() {
        return bad("need at least one anchor".into());
    }
    if detours.len() != anchors.len() {
        return bad("one detour per anchor required".into());
    }
    let pos_of: HashMap<NodeId, usize> = path.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let pos = |v: NodeId| pos_of.get(&v).copied();
    let mut anchor_pos = Vec::with_capacity(anchors.len());
    for &a in anchors {
        let Some(p) = pos(a) else { return bad(format!("anchor `{}` is not on the path", g.id(a))) };
        if anchor_pos.last().is_some_and(|&q| q >= p) {
            return bad("anchors must appear in path order".into());
        }
        anchor_pos.push(p);
    }
    let Some(last_pos) = pos(last) else { return bad(format!("`{}` is not on the path", g.id(last))) };
    if last_pos <= *anchor_pos.last().unwrap() || last_pos + 1 >= path.len() {
        return bad("u_k must follow the last anchor and precede the end of the path".into());
    }

    let mut hub: BTreeSet<NodeId> = path[last_pos + 1..].iter().copied().collect();
    let mut edges = Vec::new();
    for (l, (detour, &a)) in detours.iter().zip(anchors).enumerate() {
        if detour.first() != Some(&a) || detour.len() < 2 {
            return bad(format!("detour {} must start at its anchor", l + 1));
        }
        let ret = detour[1..].iter().position(|&v| pos(v).is_some()).map(|i| i + 1);
        let Some(ret) = ret else { return bad(format!("detour {} never returns to the path", l + 1)) };
        if pos(detour[ret]).unwrap() <= last_pos {
            return bad(format!(
                "detour {} returns at `{}`, not after `{}`",
                l + 1,
                g.id(detour[ret]),
                g.id(last)
            ));
        }
        hub.extend(detour[1..=ret].iter().copied());
        let e = g.find_edge(a, detour[1]).ok_or_else(|| MinorError::PreconditionViolated("detour is not a graph path".into()))?;
        edges.push((FanEdge::Spoke(l + 1), e));
    }

    let k = anchors.len() + 1;
    let mut branch_sets = Vec::with_capacity(k);
    for l in 0..anchors.len() {
        let end = anchor_pos.get(l + 1).copied().unwrap_or(last_pos);
        branch_sets.push(path[anchor_pos[l]..end].iter().copied().collect());
        let e = g.find_edge(path[end - 1], path[end]).expect("consecutive path nodes");
        edges.push((FanEdge::Path(l + 1), e));
    }
    branch_sets.push([last].into_iter().collect());
    let e = g.find_edge(last, path[last_pos + 1]).expect("consecutive path nodes");
    edges.push((FanEdge::Spoke(k), e));
    edges.sort();

    let witness = MinorWitness { k, branch_sets, hub, connecting_edges: edges };
    validate_minor_witness(g, &witness)?;
    Ok(witness)
}

/// Checks a witness from scratch: non-empty pairwise disjoint sets, each
/// connected in the skeleton, and every fan adjacency realized by its listed
/// edge (in either direction).
pub fn validate_minor_witness(g: &TaskGraph, w: &MinorWitness) -> Result<(), MinorError> {
    let invalid = |m: String| Err(MinorError::Invalid(m));
    if w.branch_sets.len() != w.k || w.k < 1 {
        return invalid("wrong number of branch sets".into());
    }
    let mut owner: HashMap<NodeId, usize> = HashMap::new();
    for (i, set) in w.branch_sets.iter().chain(std::iter::once(&w.hub)).enumerate() {
        if set.is_empty() {
            return invalid(format!("set {} is empty", i + 1));
        }
        for &v in set {
            if owner.insert(v, i).is_some() {
                return invalid(format!("node `{}` in two sets", g.id(v)));
            }
        }
        if !skeleton_connected(g, set) {
            return invalid(format!("set {} is not connected", i + 1));
        }
    }
    let hub_ix = w.k;
    let mut required: BTreeSet<(usize, usize)> = (0..w.k).map(|l| (l, hub_ix)).collect();
    required.extend((0..w.k.saturating_sub(1)).map(|l| (l, l + 1)));
    let mut seen = BTreeSet::new();
    for &(kind, e) in &w.connecting_edges {
        let pair = match kind {
            FanEdge::Path(l) if l >= 1 && l < w.k => (l - 1, l),
            FanEdge::Spoke(l) if l >= 1 && l <= w.k => (l - 1, hub_ix),
            _ => return invalid(format!("{kind:?} is not an edge of F_{}", w.k)),
        };
        let edge = g.edges().get(e).ok_or_else(|| MinorError::Invalid("unknown edge".into()))?;
        let ends = (owner.get(&edge.from).copied(), owner.get(&edge.to).copied());
        let ok = ends == (Some(pair.0), Some(pair.1)) || ends == (Some(pair.1), Some(pair.0));
        if !ok {
            return invalid(format!("edge {} -> {} does not witness {kind:?}", g.id(edge.from), g.id(edge.to)));
        }
        seen.insert(pair);
    }
    if seen != required {
        return invalid("some fan adjacency has no witness".into());
    }
    Ok(())
}

fn skeleton_connected(g: &TaskGraph, set: &BTreeSet<NodeId>) -> bool {
    let Some(&first) = set.iter().next() else { return true };
    let mut seen: BTreeSet<NodeId> = [first].into_iter().collect();
    let mut stack = vec![first];
    while let Some(v) = stack.pop() {
        for e in g.edges() {
            let other = if e.from == v {
                e.to
            } else if e.to == v {
                e.from
            } else {
                continue;
            };
            if set.contains(&other) && seen.insert(other) {
                stack.push(other);
            }
        }
    }
    seen.len() == set.len()
}

/// Picks `k - 1` members of `S_i` (first workable choice in lexicographic
/// order) and builds the `F_k` witness they induce.
pub fn witness_from_certificate(
    g: &TaskGraph,
    cert: &ShortcutCertificate,
    i: usize,
    k: usize,
) -> Result<MinorWitness, MinorError> {
    let s = cert
        .s_sets
        .get(i.wrapping_sub(1))
        .ok_or_else(|| MinorError::PreconditionViolated(format!("no set S_{i}")))?;
    if k < 2 || s.len() < k - 1 {
        return Err(MinorError::PreconditionViolated(format!("|S_{i}| = {} < k - 1 = {}", s.len(), k.saturating_sub(1))));
    }
    let mut last_err = None;
    for choice in combinations(s, k - 1) {
        let anchors: Vec<NodeId> = choice.iter().map(|&j| cert.shortcuts[j - 1].node).collect();
        let detours: Vec<Vec<NodeId>> = choice.iter().map(|&j| cert.shortcuts[j - 1].min_path.clone()).collect();
        let last_anchor = *choice.last().unwrap();
        let last = cert.path[cert.position(last_anchor) + 1];
        match build_minor_witness(g, &cert.path, &anchors, last, &detours) {
            Ok(w) => return Ok(w),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one combination"))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{cost_ratio, TieBreak};
    use crate::generators::akerlof;
    use crate::rational::{int, ratio};

    fn procrastinator(beta: Rational) -> AgentConfig {
        AgentConfig::new(beta).unwrap().with_tie_break(TieBreak::Procrastinate)
    }

    #[test]
    fn no_shortcuts_when_agent_is_optimal() {
        let mut b = TaskGraph::builder("g");
        b.node("s").node("a").node("t").edge("s", "a", int(1)).edge("a", "t", int(1)).edge("s", "t", int(5));
        let g = b.start("s").target("t").build().unwrap();
        let cert = analyze(&g, &AgentConfig::new(ratio(1, 2)).unwrap()).unwrap();
        assert_eq!(cert.n(), 0);
        assert_eq!(ratio_bound(&cert), int(1));
        assert_eq!(certified_lower_bound(&cert), int(2));
        check_identities(&cert).unwrap();
    }

    #[test]
    fn akerlof_k3_has_one_shortcut() {
        let g = akerlof(3, &ratio(1, 2), &int(1)).unwrap();
        let cert = analyze(&g, &procrastinator(ratio(1, 2))).unwrap();
        assert_eq!(cert.n(), 1);
        let sc = &cert.shortcuts[0];
        assert_eq!(g.id(sc.node), "v1");
        assert_eq!(g.id(sc.via), "t");
        assert_eq!(g.id(sc.merge), "t");
        assert_eq!(sc.t, int(2));
        assert_eq!(cert.s_sets, vec![vec![], vec![1]]);
        // a_1 = 1, b_1 = 1, a_2 = beta b_1 = 1/2.
        assert_eq!(cert.a, vec![int(1), ratio(1, 2)]);
        assert_eq!(cert.b, vec![int(1)]);
        // a_1 c(s, v1) + b_1 c(v1, v2) + a_2 c(v2, t) = 0 + 0 + 1/2 * 2.
        assert_eq!(certified_lower_bound(&cert), int(1));
        assert_eq!(ratio_bound(&cert), int(2));
        check_identities(&cert).unwrap();
    }

    #[test]
    fn akerlof_bound_is_tight() {
        for k in 2..=8usize {
            let beta = ratio(1, 2);
            let g = akerlof(k, &beta, &int(1)).unwrap();
            let cfg = procrastinator(beta.clone());
            let cert = analyze(&g, &cfg).unwrap();
            let expected = pow(&beta, 2 - k as i64);
            assert_eq!(cost_ratio(&g, &cfg).unwrap(), expected);
            assert!(ratio_bound(&cert) >= expected);
            check_identities(&cert).unwrap();
        }
    }

    #[test]
    fn smallest_f2_witness() {
        let mut b = TaskGraph::builder("g");
        b.node("s").node("a").node("t").edge("s", "a", int(0)).edge("a", "t", int(1)).edge("s", "t", int(1));
        let g = b.start("s").target("t").build().unwrap();
        let (s, a, t) = (0, 1, 2);
        let w = build_minor_witness(&g, &[s, a, t], &[s], a, &[vec![s, t]]).unwrap();
        assert_eq!(w.branch_sets, vec![BTreeSet::from([s]), BTreeSet::from([a])]);
        assert_eq!(w.hub, BTreeSet::from([t]));
        validate_minor_witness(&g, &w).unwrap();
    }

    #[test]
    fn early_return_violates_precondition() {
        let mut b = TaskGraph::builder("g");
        for v in ["s", "x", "a", "b", "t"] {
            b.node(v);
        }
        b.edge("s", "a", int(0)).edge("a", "b", int(0)).edge("b", "t", int(0)).edge("s", "x", int(0)).edge("x", "a", int(0));
        let g = b.start("s").target("t").build().unwrap();
        let id = |s: &str| g.node(s).unwrap();
        let path = [id("s"), id("a"), id("b"), id("t")];
        let err = build_minor_witness(&g, &path, &[id("s")], id("a"), &[vec![id("s"), id("x"), id("a")]]).unwrap_err();
        assert!(matches!(err, MinorError::PreconditionViolated(_)));
    }

    #[test]
    fn validator_rejects_overlap_and_missing_spokes() {
        let mut b = TaskGraph::builder("g");
        b.node("s").node("a").node("t").edge("s", "a", int(0)).edge("a", "t", int(1)).edge("s", "t", int(1));
        let g = b.start("s").target("t").build().unwrap();
        let mut w = build_minor_witness(&g, &[0, 1, 2], &[0], 1, &[vec![0, 2]]).unwrap();
        let mut overlapping = w.clone();
        overlapping.hub.insert(1);
        assert!(validate_minor_witness(&g, &overlapping).is_err());
        w.connecting_edges.retain(|(kind, _)| *kind != FanEdge::Spoke(1));
        assert!(validate_minor_witness(&g, &w).is_err());
    }
}
