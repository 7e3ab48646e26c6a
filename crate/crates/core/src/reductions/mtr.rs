//! 3-SAT to minimum total reward.
//!
//! Clause `i` is a chain `a{i}_1 .. a{i}_l` (steps of `beta x`) with an exit
//! `a{i}_1 -> b{i}`. After the last clause the agent walks `c1 .. cn` and
//! then descends two ladders, `u{k} -> v{k} -> u{k-1}` and the primed copy,
//! to `u0`/`u0'` and `t`. A literal of variable `k` in clause `i` adds edges
//! `a{i}_j -> v{k}` (or `v{k}'` if negated) of weight `g_k` for `j >= 2`, and
//! the clause adds `b{i} -> u{k-1}`, `b{i} -> u{k-1}'` of weight `h_k`.
//!
//! A satisfying assignment is paid for with `x` on `v{k}` (true) or `v{k}'`
//! (false) plus `r_t` on `t`, for a total of `n x + r_t`.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::cnf::{Assignment, Formula3Cnf};
use crate::agent::{simulate_with_rewards, AgentConfig, RewardConfig, Trajectory};
use crate::graph::{NodeId, TaskGraph};
use crate::rational::{ceil, int, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MtrError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("n = {n} is too small at beta = {beta}: need n x > 2/beta; pad to n = {minimal}")]
    NTooSmall { n: usize, beta: String, minimal: usize },
    #[error("formula has no clauses")]
    NoClauses,
    #[error("constant relation {0} violated")]
    RelationViolated(String),
    #[error("assignment does not satisfy the formula")]
    AssignmentNotSatisfying,
    #[error("rewards do not encode a satisfying assignment: {0}")]
    InfeasibleRewards(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtrConstants {
    pub beta: Rational,
    pub n: usize,
    pub x: Rational,
    pub y: Rational,
    pub r_t: Rational,
    pub l: usize,
}

impl MtrConstants {
    pub fn new(beta: &Rational, n: usize) -> Result<Self, MtrError> {
        if !beta.is_positive() || *beta >= Rational::one() {
            return Err(MtrError::BadParameter(format!("beta must lie in (0,1), got {}", Frac(beta))));
        }
        let inv = beta.recip();
        let x = &inv - Rational::one();
        if &x * int(n as i64) <= int(2) * &inv {
            return Err(MtrError::NTooSmall { n, beta: Frac(beta).to_string(), minimal: minimal_n(beta) });
        }
        let y = &x / int(2);
        let r_t = int(12 * n as i64 - 6) + int(6) * &inv;
        let nx = &x * int(n as i64);
        let l = ceil(&((&nx + &r_t) / (beta * &x))).to_usize().expect("chain length fits") + 1;
        Ok(MtrConstants { beta: beta.clone(), n, x, y, r_t, l })
    }

    pub fn g(&self, k: usize) -> Rational {
        int(6 * (2 * self.n as i64 - k as i64))
    }

    pub fn h(&self, k: usize) -> Rational {
        self.g(k) + int(6) + &self.y
    }

    /// `n x + r_t`, the reward a satisfying assignment costs.
    pub fn budget(&self) -> Rational {
        &self.x * int(self.n as i64) + &self.r_t
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "beta {}", Frac(&self.beta)).unwrap();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "x {}", Frac(&self.x)).unwrap();
        writeln!(out, "y {}", Frac(&self.y)).unwrap();
        writeln!(out, "r_t {}", Frac(&self.r_t)).unwrap();
        writeln!(out, "l {}", self.l).unwrap();
        writeln!(out, "budget {}", Frac(&self.budget())).unwrap();
        for k in 1..=self.n {
            writeln!(out, "g_{k} {} h_{k} {}", Frac(&self.g(k)), Frac(&self.h(k))).unwrap();
        }
        out
    }
}

/// Smallest `n` with `n (1/beta - 1) > 2/beta`.
pub fn minimal_n(beta: &Rational) -> usize {
    let inv = beta.recip();
    let x = &inv - Rational::one();
    let q = int(2) * &inv / &x;
    (q.floor().to_integer() + 1u32).to_usize().expect("small")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Equal,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Less => "<",
            Comparison::Greater => ">",
            Comparison::Equal => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationCheck {
    /// Relation number, 1 to 9.
    pub relation: u8,
    /// `None` for relations that do not depend on `k`.
    pub k: Option<usize>,
    pub lhs: Rational,
    pub cmp: Comparison,
    pub rhs: Rational,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        match self.cmp {
            Comparison::Less => self.lhs < self.rhs,
            Comparison::Greater => self.lhs > self.rhs,
            Comparison::Equal => self.lhs == self.rhs,
        }
    }

    fn label(&self) -> String {
        match self.k {
            Some(k) => format!("({}) k={k}", self.relation),
            None => format!("({})", self.relation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantsReport {
    pub checks: Vec<RelationCheck>,
}

impl ConstantsReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(RelationCheck::holds)
    }

    pub fn failures(&self) -> Vec<&RelationCheck> {
        self.checks.iter().filter(|c| !c.holds()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.holds() { "ok" } else { "VIOLATED" };
            writeln!(out, "{} {} {} {} {verdict}", c.label(), Frac(&c.lhs), c.cmp, Frac(&c.rhs)).unwrap();
        }
        out
    }
}

/// All nine relations between the constants, exactly, for `k = 1..n`.
pub fn verify_constants(c: &MtrConstants) -> ConstantsReport {
    let inv = c.beta.recip();
    let nx_rt = c.budget();
    let six = int(6);
    let mut checks = Vec::new();
    let mut push = |relation: u8, k: Option<usize>, lhs: Rational, cmp: Comparison, rhs: Rational| {
        checks.push(RelationCheck { relation, k, lhs, cmp, rhs });
    };
    use Comparison::*;
    for k in 1..=c.n {
        let (g, h) = (c.g(k), c.h(k));
        let kk = int(k as i64);
        let via_v = &c.x + &g - &c.x + &six * &kk;
        push(1, Some(k), &h * &inv + &six * int(k as i64 - 1), Greater, nx_rt.clone());
        push(2, Some(k), &g * &inv + &six * &kk, Greater, nx_rt.clone());
        push(4, Some(k), h.clone(), Less, &c.x + &g + &six);
        push(5, Some(k), via_v.clone(), Less, c.r_t.clone());
        push(6, Some(k), via_v.clone(), Less, &h + &six * int(k as i64 - 1));
        push(7, Some(k), &c.beta * &c.x + &g - &c.x + &six * &kk, Less, c.r_t.clone());
        push(9, Some(k), via_v, Less, &g * &inv - &c.x + &six * &kk);
    }
    push(3, None, int(c.l as i64 - 1) * &c.beta * &c.x, Greater, nx_rt);
    push(8, None, &six * &inv + &six * int(c.n as i64 - 1) + &six * int(c.n as i64), Equal, c.r_t.clone());
    checks.sort_by_key(|c| (c.relation, c.k));
    ConstantsReport { checks }
}

/// What the gadget's own construction guarantees: every relation, except
/// that the chain length only ensures `(l - 1) beta x >= n x + r_t`.
fn construction_holds(report: &ConstantsReport) -> Result<(), MtrError> {
    for c in report.failures() {
        if c.relation == 3 && c.lhs == c.rhs {
            continue;
        }
        return Err(MtrError::RelationViolated(c.label()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtrGadget {
    pub graph: TaskGraph,
    pub formula: Formula3Cnf,
    pub constants: MtrConstants,
    pub report: ConstantsReport,
    pub notes: Vec<String>,
}

pub fn chain_node(i: usize, j: usize) -> String {
    format!("a{i}_{j}")
}

pub fn u_node(k: usize, primed: bool) -> String {
    format!("u{k}{}", if primed { "'" } else { "" })
}

pub fn v_node(k: usize, primed: bool) -> String {
    format!("v{k}{}", if primed { "'" } else { "" })
}

/// Builds the gadget for `f` as given; pad with [`Formula3Cnf::padded`] and
/// [`minimal_n`] when `f` has too few variables.
pub fn build_mtr_gadget(f: &Formula3Cnf, beta: &Rational) -> Result<MtrGadget, MtrError> {
    let c = MtrConstants::new(beta, f.num_vars)?;
    if f.clauses.is_empty() {
        return Err(MtrError::NoClauses);
    }
    let report = verify_constants(&c);
    construction_holds(&report)?;
    let (m, n, l) = (f.clauses.len(), c.n, c.l);
    let zero = Rational::zero();
    let step = &c.beta * &c.x;
    let six = int(6);
    let mut notes = Vec::new();
    let mut b = TaskGraph::builder("mtr-gadget");

    b.node("s");
    for i in 1..=m {
        for j in 1..=l {
            b.node(chain_node(i, j));
        }
        b.node(format!("b{i}"));
    }
    for i in 1..=n {
        b.node(format!("c{i}"));
    }
    for k in (0..=n).rev() {
        for primed in [false, true] {
            b.node(u_node(k, primed));
        }
        if k > 0 {
            for primed in [false, true] {
                b.node(v_node(k, primed));
            }
        }
    }
    b.node("t");

    b.edge("s", chain_node(1, 1), zero.clone());
    for i in 1..=m {
        b.edge(chain_node(i, 1), format!("b{i}"), zero.clone());
        for j in 1..l {
            b.edge(chain_node(i, j), chain_node(i, j + 1), step.clone());
        }
        let next = if i < m { chain_node(i + 1, 1) } else { "c1".to_string() };
        b.edge(chain_node(i, l), next, zero.clone());
    }
    for i in 1..n {
        b.edge(format!("c{i}"), format!("c{}", i + 1), six.clone());
    }
    for primed in [false, true] {
        b.edge(format!("c{n}"), u_node(n, primed), six.clone());
        b.edge(u_node(0, primed), "t", zero.clone());
    }
    for k in 1..=n {
        for primed in [false, true] {
            b.edge(u_node(k, primed), v_node(k, primed), c.x.clone());
            for next in [false, true] {
                b.edge(v_node(k, primed), u_node(k - 1, next), six.clone());
            }
        }
    }
    for (idx, clause) in f.clauses.iter().enumerate() {
        let i = idx + 1;
        let mut vars = BTreeSet::new();
        let mut lits = BTreeSet::new();
        for lit in clause {
            if !lits.insert((lit.var, lit.positive)) {
                notes.push(format!("clause {i}: repeated literal {lit} merged"));
                continue;
            }
            let k = lit.var;
            if vars.insert(k) {
                for primed in [false, true] {
                    b.edge(format!("b{i}"), u_node(k - 1, primed), c.h(k));
                }
            }
            for j in 2..=l {
                b.edge(chain_node(i, j), v_node(k, !lit.positive), c.g(k));
            }
        }
    }
    b.start("s").target("t");
    let graph = b.build().map_err(|e| MtrError::BadParameter(e.to_string()))?;
    Ok(MtrGadget { graph, formula: f.clone(), constants: c, report, notes })
}

impl MtrGadget {
    pub fn agent(&self) -> AgentConfig {
        AgentConfig::new(self.constants.beta.clone()).expect("beta checked")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            writeln!(out, "# note: {n}").unwrap();
        }
        for line in self.constants.render().lines() {
            writeln!(out, "# {line}").unwrap();
        }
        out.push_str(&crate::text::render_annotated(&self.graph, |v| Some(self.node_role(v)), |_| None));
        out
    }

    fn node_role(&self, v: NodeId) -> String {
        let id = self.graph.id(v);
        let role = match id.as_bytes()[0] {
            b's' => "source",
            b't' => "target",
            b'a' => "clause chain",
            b'b' => "clause exit",
            b'c' => "counter",
            b'u' => "ladder entry",
            _ => "variable",
        };
        format!("role: {id} {role}")
    }

    fn pad(&self, asg: &[bool]) -> Assignment {
        let mut full = asg.to_vec();
        full.resize(self.constants.n, false);
        full
    }
}

/// `x` on `v{k}` for true variables and on `v{k}'` for false ones, `r_t` on
/// `t`. Missing variables count as false.
pub fn assignment_to_rewards(g: &MtrGadget, asg: &[bool]) -> Result<RewardConfig, MtrError> {
    let asg = g.pad(asg);
    if !g.formula.satisfied_by(&asg) {
        return Err(MtrError::AssignmentNotSatisfying);
    }
    let mut rw = RewardConfig::new();
    for (k, &value) in asg.iter().enumerate() {
        rw.set(v_node(k + 1, !value), g.constants.x.clone());
    }
    rw.set("t", g.constants.r_t.clone());
    Ok(rw)
}

/// Reads `x_k = true` iff `v{k}` carries reward, after checking that the
/// agent reaches `t`, the total stays within `n x + r_t`, no variable is
/// paid on both sides, and the result satisfies the formula.
pub fn rewards_to_assignment(g: &MtrGadget, rw: &RewardConfig) -> Result<Assignment, MtrError> {
    let bad = |m: String| Err(MtrError::InfeasibleRewards(m));
    let total = rw.total_abs();
    if total > g.constants.budget() {
        return bad(format!("total {} exceeds {}", Frac(&total), Frac(&g.constants.budget())));
    }
    let traj = simulate_with_rewards(&g.graph, &g.agent(), rw).map_err(|e| MtrError::InfeasibleRewards(e.to_string()))?;
    if !traj.reached() {
        return bad(traj.outcome_line(&g.graph));
    }
    let mut asg = Vec::with_capacity(g.constants.n);
    for k in 1..=g.constants.n {
        let (pos, neg) = (rw.get(&v_node(k, false)), rw.get(&v_node(k, true)));
        if !pos.is_zero() && !neg.is_zero() {
            return bad(format!("both v{k} and v{k}' carry reward"));
        }
        asg.push(!pos.is_zero());
    }
    if !g.formula.satisfied_by(&asg) {
        return bad("extracted assignment does not satisfy the formula".into());
    }
    Ok(asg)
}

/// One "at `from` the agent moves toward `to`" claim about the walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadTo {
    /// Statement number, 1 to 8.
    pub statement: u8,
    pub from: String,
    pub to: String,
    pub holds: bool,
    /// Gap between the chosen value and the best alternative (`None` if the
    /// node has a single option or the agent never got there).
    pub margin: Option<Rational>,
}

/// Checks the walk of `traj` against the route a satisfying assignment
/// should produce: through every clause chain in order, along the counters,
/// and down the ladder through the paid variable nodes.
pub fn lead_to_checks(g: &MtrGadget, asg: &[bool], traj: &Trajectory) -> Vec<LeadTo> {
    let asg = g.pad(asg);
    let (m, n, l) = (g.formula.clauses.len(), g.constants.n, g.constants.l);
    let mut expected: Vec<(u8, String, String)> = vec![(1, "s".into(), chain_node(1, 1))];
    for i in 1..=m {
        expected.push((2, chain_node(i, 1), chain_node(i, 2)));
        for j in 2..l {
            expected.push((3, chain_node(i, j), chain_node(i, j + 1)));
        }
        if i < m {
            expected.push((4, chain_node(i, l), chain_node(i + 1, 1)));
        }
    }
    expected.push((5, chain_node(m, l), "c1".into()));
    for i in 1..n {
        expected.push((6, format!("c{i}"), format!("c{}", i + 1)));
    }
    expected.push((7, format!("c{n}"), u_node(n, !asg[n - 1])));
    for k in (1..=n).rev() {
        let primed = !asg[k - 1];
        expected.push((8, u_node(k, primed), v_node(k, primed)));
        let next = if k > 1 { u_node(k - 1, !asg[k - 2]) } else { "u0|u0'".into() };
        expected.push((8, v_node(k, primed), next));
    }
    expected.push((8, "u0|u0'".into(), "t".into()));

    let gr = &g.graph;
    expected
        .into_iter()
        .map(|(statement, from, to)| {
            let matches = |pattern: &str, v: NodeId| pattern.split('|').any(|p| p == gr.id(v));
            let step = traj.steps.iter().find(|s| matches(&from, s.node));
            let (holds, margin) = match step {
                Some(s) => {
                    let took = s.next.is_some_and(|nx| matches(&to, nx));
                    // A tie between interchangeable targets (`u0`, `u0'`) is fine.
                    let interchangeable = to.contains('|');
                    let margin = s.chosen_value().and_then(|chosen| {
                        s.evaluations
                            .iter()
                            .filter(|(v, _)| Some(*v) != s.next && !(interchangeable && matches(&to, *v)))
                            .map(|(_, q)| q - chosen)
                            .min()
                    });
                    let strict = !s.tied || interchangeable;
                    (took && strict, margin)
                }
                None => (false, None),
            };
            LeadTo { statement, from, to, holds, margin }
        })
        .collect()
}

/// Reward configurations derived from a valid one by a single change, with
/// whether the agent should still reach `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    pub label: String,
    pub rewards: RewardConfig,
    pub should_reach: bool,
}

/// Dropping `r_t`; shaving `r_t` by `x/2`; moving the reward of each
/// variable to its other side (fine exactly when the flipped assignment
/// still satisfies the formula); and splitting it evenly between both sides.
pub fn perturbations(g: &MtrGadget, asg: &[bool]) -> Result<Vec<Perturbation>, MtrError> {
    let asg = g.pad(asg);
    let base = assignment_to_rewards(g, &asg)?;
    let c = &g.constants;
    let mut out = Vec::new();
    let mut no_goal = base.clone();
    no_goal.set("t", Rational::zero());
    out.push(Perturbation { label: "drop r_t".into(), rewards: no_goal, should_reach: false });
    let mut shaved = base.clone();
    shaved.set("t", &c.r_t - &c.y);
    out.push(Perturbation { label: "shave r_t by y".into(), rewards: shaved, should_reach: false });
    for k in 1..=c.n {
        let paid = !asg[k - 1];
        let mut flipped_asg = asg.clone();
        flipped_asg[k - 1] = !asg[k - 1];
        let mut moved = base.clone();
        moved.set(v_node(k, paid), Rational::zero());
        moved.set(v_node(k, !paid), c.x.clone());
        out.push(Perturbation {
            label: format!("move reward of v{k} to the other side"),
            rewards: moved,
            should_reach: g.formula.satisfied_by(&flipped_asg),
        });
        let mut split = base.clone();
        split.set(v_node(k, false), &c.x / int(2));
        split.set(v_node(k, true), &c.x / int(2));
        out.push(Perturbation { label: format!("split reward of v{k}"), rewards: split, should_reach: false });
    }
    Ok(out)
}

/// Builds on the minimal admissible `n` (padding `f` if needed).
pub fn build_mtr_gadget_padded(f: &Formula3Cnf, beta: &Rational, pad_n: Option<usize>) -> Result<MtrGadget, MtrError> {
    if !beta.is_positive() || *beta >= Rational::one() {
        return Err(MtrError::BadParameter(format!("beta must lie in (0,1), got {}", Frac(beta))));
    }
    let n = pad_n.unwrap_or(0).max(minimal_n(beta));
    build_mtr_gadget(&f.padded(n), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::reductions::cnf::{parse_dimacs, Literal};

    fn half() -> Rational {
        ratio(1, 2)
    }

    #[test]
    fn constants_at_one_half() {
        let c = MtrConstants::new(&half(), 5).unwrap();
        assert_eq!((c.x.clone(), c.y.clone(), c.r_t.clone(), c.l), (int(1), ratio(1, 2), int(66), 143));
        assert_eq!(c.g(1), int(54));
        assert_eq!(c.h(1), ratio(121, 2));
        assert_eq!(c.budget(), int(71));
    }

    #[test]
    fn small_n_is_rejected_with_a_hint() {
        assert_eq!(minimal_n(&half()), 5);
        let err = MtrConstants::new(&half(), 3).unwrap_err();
        assert!(matches!(err, MtrError::NTooSmall { n: 3, minimal: 5, .. }), "{err}");
        assert!(MtrConstants::new(&half(), 4).is_err());
        assert_eq!(minimal_n(&ratio(2, 3)), 7);
    }

    #[test]
    fn chain_relation_is_tight_at_one_half() {
        let report = verify_constants(&MtrConstants::new(&half(), 5).unwrap());
        let failures = report.failures();
        assert_eq!(failures.len(), 1);
        assert_eq!((failures[0].relation, failures[0].lhs.clone()), (3, int(71)));
        assert!(report.render().contains("(3) 71/1 > 71/1 VIOLATED"), "{}", report.render());
        let c = MtrConstants::new(&ratio(2, 3), 7).unwrap();
        assert!(verify_constants(&c).all_hold(), "{}", verify_constants(&c).render());
    }

    #[test]
    fn node_count_matches_layout() {
        let f = parse_dimacs("p cnf 5 2\n1 -2 3 0\n-1 4 5 0\n").unwrap();
        let g = build_mtr_gadget(&f, &half()).unwrap();
        let (m, n, l) = (2, 5, 143);
        assert_eq!(g.graph.node_count(), m * (l + 1) + 4 * n + 2 + n + 2);
        g.graph.validate().unwrap();
    }

    #[test]
    fn forward_direction_reaches_t() {
        let f = parse_dimacs("p cnf 5 2\n1 -2 3 0\n-1 4 5 0\n").unwrap();
        let g = build_mtr_gadget(&f, &half()).unwrap();
        let asg = vec![true, true, false, false, true];
        let rw = assignment_to_rewards(&g, &asg).unwrap();
        assert_eq!(rw.total_abs(), int(71));
        let traj = simulate_with_rewards(&g.graph, &g.agent(), &rw).unwrap();
        assert!(traj.reached(), "{}", traj.outcome_line(&g.graph));
        let checks = lead_to_checks(&g, &asg, &traj);
        let bad: Vec<_> = checks.iter().filter(|c| !c.holds).collect();
        assert!(bad.is_empty(), "{bad:?}");
        assert_eq!(rewards_to_assignment(&g, &rw).unwrap(), asg);
    }

    #[test]
    fn unsatisfying_assignment_is_refused() {
        let f = Formula3Cnf::new(5, vec![[Literal::pos(1); 3]]).unwrap();
        let g = build_mtr_gadget(&f, &half()).unwrap();
        assert_eq!(assignment_to_rewards(&g, &[false]), Err(MtrError::AssignmentNotSatisfying));
        assert!(matches!(rewards_to_assignment(&g, &RewardConfig::new()), Err(MtrError::InfeasibleRewards(_))));
    }
}
