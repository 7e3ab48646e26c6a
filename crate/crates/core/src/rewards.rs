//! Minimum-total-reward placement (MTR).
//!
//! Find rewards `r` so the agent, moving under the intermediate-reward model,
//! reaches `t`, minimizing `sum |r(v)|`. Variants:
//!
//! * `I`: `r(v) >= 0` everywhere;
//! * `II`: `r(v) >= 0`, and zero off the path the agent actually walks;
//! * `III`: signed rewards.
//!
//! [`solve_exact`] enumerates candidate trajectories `P` and, per node of
//! `P`, a witness continuation `W_u` that starts with `P`'s edge; each
//! combination is a linear program in `r`, solved exactly. Branches are cut
//! as soon as a partial LP is infeasible or already no better than the
//! incumbent.

use std::fmt::Write;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::agent::{reward_adjusted_rest, simulate_with_rewards, AgentConfig, AgentError, RewardConfig, TieBreak, Trajectory};
use crate::graph::{NodeId, TaskGraph};
use crate::lp::{minimize, Constraint, LpOutcome, Relation};
use crate::rational::{Frac, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    I,
    II,
    III,
}

impl Variant {
    pub fn from_number(n: u8) -> Option<Variant> {
        match n {
            1 => Some(Variant::I),
            2 => Some(Variant::II),
            3 => Some(Variant::III),
            _ => None,
        }
    }
}

/// How the solver treats ties between the intended move and a rival.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Ties are resolved toward the intended path.
    #[default]
    Optimistic,
    /// Every rival first edge must be worse by at least the margin.
    Strict(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtrInstance {
    pub graph: TaskGraph,
    pub beta: Rational,
    /// Decision bound on `sum |r|`; `None` means unbounded.
    pub bound: Option<Rational>,
    pub variant: Variant,
    pub tie_mode: TieMode,
    /// Tie rule used when simulating externally supplied rewards.
    pub tie_break: TieBreak,
}

impl MtrInstance {
    pub fn new(graph: TaskGraph, beta: Rational, variant: Variant) -> Self {
        MtrInstance { graph, beta, bound: None, variant, tie_mode: TieMode::Optimistic, tie_break: TieBreak::Lexicographic }
    }

    pub fn with_bound(mut self, bound: Rational) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_tie_mode(mut self, mode: TieMode) -> Self {
        self.tie_mode = mode;
        self
    }

    pub fn with_tie_break(mut self, tie: TieBreak) -> Self {
        self.tie_break = tie;
        self
    }

    fn config(&self, tie: TieBreak) -> Result<AgentConfig, MtrError> {
        Ok(AgentConfig::new(self.beta.clone())?.with_tie_break(tie))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtrSolution {
    pub rewards: RewardConfig,
    pub trajectory: Trajectory,
    pub objective: Rational,
    pub optimal: bool,
}

impl MtrSolution {
    pub fn render(&self, g: &TaskGraph) -> String {
        let mut out = String::new();
        for (node, value) in self.rewards.iter() {
            writeln!(out, "reward {node} {}", Frac(value)).unwrap();
        }
        writeln!(out, "objective {}", Frac(&self.objective)).unwrap();
        writeln!(out, "optimal {}", self.optimal).unwrap();
        out.push_str(&self.trajectory.render_lines(g));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MtrError {
    #[error("variant violation: {0}")]
    VariantViolation(String),
    #[error("budget exceeded before any feasible configuration was found")]
    BudgetExceeded,
    #[error("no reward configuration makes the agent reach the target within the bound")]
    NoneExists,
    #[error(transparent)]
    Agent(#[from] AgentError),
}

fn variant_violation(g: &TaskGraph, inst: &MtrInstance, rw: &RewardConfig, traj: Option<&Trajectory>) -> Option<String> {
    if inst.variant == Variant::III {
        return None;
    }
    if let Some((v, _)) = rw.iter().find(|(_, q)| q.is_negative()) {
        return Some(format!("negative reward at `{v}`"));
    }
    if inst.variant == Variant::II {
        let traj = traj?;
        let on_path = |id: &str| traj.nodes.iter().any(|&v| g.id(v) == id);
        if let Some((v, _)) = rw.iter().find(|(id, _)| !on_path(id)) {
            return Some(format!("reward at `{v}` off the walked path"));
        }
    }
    None
}

/// Simulates `rw` and returns a solution iff the agent reaches `t` and the
/// total stays within the bound; `Ok(None)` means infeasible.
pub fn check_feasible(inst: &MtrInstance, rw: &RewardConfig) -> Result<Option<MtrSolution>, MtrError> {
    let g = &inst.graph;
    if let Some(id) = rw.iter().map(|(id, _)| id).find(|id| g.node(id).is_none()) {
        return Err(MtrError::VariantViolation(format!("unknown node `{id}`")));
    }
    if let Some(msg) = variant_violation(g, inst, rw, None) {
        return Err(MtrError::VariantViolation(msg));
    }
    let traj = simulate_with_rewards(g, &inst.config(inst.tie_break.clone())?, rw)?;
    if let Some(msg) = variant_violation(g, inst, rw, Some(&traj)) {
        return Err(MtrError::VariantViolation(msg));
    }
    let objective = rw.total_abs();
    let within = inst.bound.as_ref().is_none_or(|b| objective <= *b);
    if !traj.reached() || !within {
        return Ok(None);
    }
    Ok(Some(MtrSolution { rewards: rw.clone(), trajectory: traj, objective, optimal: false }))
}

/// Enumeration limits for [`solve_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    /// Maximum number of linear programs solved.
    pub max_lps: usize,
    /// Maximum number of paths enumerated from any single node.
    pub max_paths: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { max_lps: 200_000, max_paths: 300 }
    }
}

/// `c'(Q)` as `constant + sum coeff * r(v)`.
struct Linear {
    constant: Rational,
    terms: Vec<(NodeId, Rational)>,
}

fn perceived(g: &TaskGraph, beta: &Rational, path: &[NodeId]) -> Linear {
    let cost = |i: usize| g.edge(g.find_edge(path[i], path[i + 1]).expect("path edge")).cost.clone();
    let mut constant = cost(0);
    for i in 1..path.len() - 1 {
        constant += beta * cost(i);
    }
    let terms = path[1..].iter().map(|&v| (v, -beta)).collect();
    Linear { constant, terms }
}

/// Maps node rewards onto LP columns: one column per allowed node, two for
/// signed rewards.
struct Columns {
    pos: Vec<Option<usize>>,
    neg: Vec<Option<usize>>,
    width: usize,
}

impl Columns {
    fn new(g: &TaskGraph, variant: Variant, path: &[NodeId]) -> Self {
        let n = g.node_count();
        let mut pos = vec![None; n];
        let mut neg = vec![None; n];
        let mut width = 0;
        for v in 0..n {
            if variant == Variant::II && !path.contains(&v) {
                continue;
            }
            pos[v] = Some(width);
            width += 1;
            if variant == Variant::III {
                neg[v] = Some(width);
                width += 1;
            }
        }
        Columns { pos, neg, width }
    }

    /// Row for `lhs - rhs <= bound`.
    fn difference(&self, lhs: &Linear, rhs: Option<&Linear>, bound: Rational) -> Constraint {
        let mut coeffs = vec![Rational::zero(); self.width];
        let mut constant = lhs.constant.clone();
        let mut add = |terms: &[(NodeId, Rational)], sign: &Rational| {
            for (v, c) in terms {
                if let Some(p) = self.pos[*v] {
                    coeffs[p] += sign * c;
                }
                if let Some(q) = self.neg[*v] {
                    coeffs[q] -= sign * c;
                }
            }
        };
        add(&lhs.terms, &Rational::one());
        if let Some(r) = rhs {
            add(&r.terms, &-Rational::one());
            constant -= &r.constant;
        }
        Constraint::new(coeffs, Relation::Le, bound - constant)
    }

    fn rewards(&self, g: &TaskGraph, x: &[Rational]) -> RewardConfig {
        let mut rw = RewardConfig::default();
        for v in 0..g.node_count() {
            let mut q = Rational::zero();
            if let Some(p) = self.pos[v] {
                q += &x[p];
            }
            if let Some(n) = self.neg[v] {
                q -= &x[n];
            }
            rw.set(g.id(v), q);
        }
        rw
    }
}

struct Search<'a> {
    inst: &'a MtrInstance,
    budget: SolveBudget,
    lps: usize,
    truncated: bool,
    best: Option<MtrSolution>,
}

impl Search<'_> {
    fn solve(&mut self, cols: &Columns, rows: &[Constraint]) -> Option<Option<(Vec<Rational>, Rational)>> {
        if self.lps >= self.budget.max_lps {
            self.truncated = true;
            return None;
        }
        self.lps += 1;
        let objective = vec![Rational::one(); cols.width];
        Some(match minimize(&objective, rows) {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
        })
    }

    fn beats_incumbent(&self, value: &Rational) -> bool {
        self.best.as_ref().is_none_or(|b| *value < b.objective)
    }

    fn descend(
        &mut self,
        path: &[NodeId],
        cols: &Columns,
        stages: &[Vec<Vec<Constraint>>],
        level: usize,
        rows: &mut Vec<Constraint>,
    ) {
        if level == stages.len() {
            return;
        }
        for choice in &stages[level] {
            let before = rows.len();
            rows.extend(choice.iter().cloned());
            match self.solve(cols, rows) {
                None => {
                    rows.truncate(before);
                    return;
                }
                Some(Some((x, value))) if self.beats_incumbent(&value) => {
                    if level + 1 == stages.len() {
                        self.accept(path, cols, &x, value);
                    } else {
                        self.descend(path, cols, stages, level + 1, rows);
                    }
                }
                Some(_) => {}
            }
            rows.truncate(before);
            if self.truncated {
                return;
            }
        }
    }

    fn accept(&mut self, path: &[NodeId], cols: &Columns, x: &[Rational], value: Rational) {
        let g = &self.inst.graph;
        let rewards = cols.rewards(g, x);
        let tie = match self.inst.tie_mode {
            TieMode::Optimistic => TieBreak::Custom(path.iter().map(|&v| g.id(v).to_string()).collect()),
            TieMode::Strict(_) => self.inst.tie_break.clone(),
        };
        let cfg = self.inst.config(tie).expect("beta validated");
        let traj = simulate_with_rewards(g, &cfg, &rewards).expect("reachable");
        assert!(
            traj.reached() && traj.nodes == path,
            "LP solution does not realize its trajectory"
        );
        self.best = Some(MtrSolution { rewards, trajectory: traj, objective: value, optimal: false });
    }
}

/// Exact optimum over all trajectories (see the module docs). With a
/// truncated enumeration the best configuration found so far is returned
/// with `optimal = false`.
pub fn solve_exact(inst: &MtrInstance, budget: SolveBudget) -> Result<MtrSolution, MtrError> {
    let g = &inst.graph;
    AgentConfig::new(inst.beta.clone())?;
    if g.dist_to_target()[g.start()].is_none() {
        return Err(AgentError::TargetUnreachable(g.id(g.start()).to_string()).into());
    }
    let beta = &inst.beta;
    let mut search = Search { inst, budget, lps: 0, truncated: false, best: None };
    let mut from_cache: Vec<Option<Vec<Vec<NodeId>>>> = vec![None; g.node_count()];
    let mut paths_from = |v: NodeId, truncated: &mut bool| -> Vec<Vec<NodeId>> {
        from_cache[v]
            .get_or_insert_with(|| {
                let ps = g.paths_to_target(v, budget.max_paths);
                if ps.len() >= budget.max_paths {
                    *truncated = true;
                }
                ps
            })
            .clone()
    };

    let mut truncated = false;
    let trajectories = paths_from(g.start(), &mut truncated);
    for path in &trajectories {
        let cols = Columns::new(g, inst.variant, path);
        let mut stages = Vec::with_capacity(path.len());
        for i in 0..path.len() - 1 {
            let (u, next) = (path[i], path[i + 1]);
            let all = paths_from(u, &mut truncated);
            let rivals: Vec<Linear> =
                all.iter().filter(|q| q[1] != next).map(|q| perceived(g, beta, q)).collect();
            let margin = match &inst.tie_mode {
                TieMode::Optimistic => Rational::zero(),
                TieMode::Strict(eps) => -eps.clone(),
            };
            let choices = all
                .iter()
                .filter(|w| w[1] == next)
                .map(|w| {
                    let lin = perceived(g, beta, w);
                    let mut rows = vec![cols.difference(&lin, None, Rational::zero())];
                    rows.extend(rivals.iter().map(|q| cols.difference(&lin, Some(q), margin.clone())));
                    rows
                })
                .collect();
            stages.push(choices);
        }
        if stages.is_empty() {
            // s == t cannot occur in a valid graph, but stay total.
            continue;
        }
        let mut rows = Vec::new();
        search.descend(path, &cols, &stages, 0, &mut rows);
        if search.truncated {
            break;
        }
    }

    let complete = !search.truncated && !truncated;
    match search.best {
        Some(mut sol) => {
            if inst.bound.as_ref().is_some_and(|b| sol.objective > *b) {
                return if complete { Err(MtrError::NoneExists) } else { Err(MtrError::BudgetExceeded) };
            }
            sol.optimal = complete;
            Ok(sol)
        }
        None if complete => Err(MtrError::NoneExists),
        None => Err(MtrError::BudgetExceeded),
    }
}

/// Nodes whose reward can influence the agent: reachable from `s`, able to
/// reach `t`, and not `s` itself (its reward is claimed before any decision).
fn relevant_nodes(g: &TaskGraph) -> Vec<NodeId> {
    let mut reach = vec![false; g.node_count()];
    reach[g.start()] = true;
    for &u in g.topo_order() {
        if reach[u] {
            for &e in g.out_edges(u) {
                reach[g.edge(e).to] = true;
            }
        }
    }
    let d = g.dist_to_target();
    (0..g.node_count()).filter(|&v| v != g.start() && reach[v] && d[v].is_some()).collect()
}

/// Brute-force grid search: every reward vector with entries in
/// `{0, +-delta, ..., +-cap}` (non-negative unless variant III), visited in
/// order of increasing total. Ties follow the instance's tie mode: some
/// resolution must reach `t` (optimistic) or all must (strict). Returns the
/// smallest feasible total.
pub fn grid_oracle(inst: &MtrInstance, delta: &Rational, cap: &Rational) -> Option<Rational> {
    assert!(delta.is_positive(), "grid step must be positive");
    let g = &inst.graph;
    let nodes = relevant_nodes(g);
    let steps = (cap / delta).floor().to_integer();
    let steps: usize = steps.try_into().unwrap_or(0);
    let max_total = steps * nodes.len();
    let feasible = |units: &[usize]| {
        let support: Vec<usize> = (0..units.len()).filter(|&i| units[i] > 0).collect();
        let signs = if inst.variant == Variant::III { 1usize << support.len() } else { 1 };
        (0..signs).any(|mask| {
            let mut r = vec![Rational::zero(); g.node_count()];
            for (bit, &i) in support.iter().enumerate() {
                let q = delta * Rational::from_integer(units[i].into());
                r[nodes[i]] = if mask >> bit & 1 == 1 { -q } else { q };
            }
            let walks = tie_resolutions(g, &inst.beta, &r);
            let good = |w: &Option<Vec<NodeId>>| {
                w.as_ref().is_some_and(|p| inst.variant != Variant::II || (0..r.len()).all(|v| r[v].is_zero() || p.contains(&v)))
            };
            match inst.tie_mode {
                TieMode::Optimistic => walks.iter().any(good),
                TieMode::Strict(_) => walks.iter().all(good),
            }
        })
    };
    let mut units = vec![0usize; nodes.len()];
    for total in 0..=max_total {
        if compositions(&mut units, 0, total, steps, &feasible) {
            let value = delta * Rational::from_integer(total.into());
            return match &inst.bound {
                Some(b) if value > *b => None,
                _ => Some(value),
            };
        }
    }
    None
}

/// Every walk the agent may take under `r` when each tie can go either way;
/// `None` marks a walk that ends in abandonment.
fn tie_resolutions(g: &TaskGraph, beta: &Rational, r: &[Rational]) -> Vec<Option<Vec<NodeId>>> {
    let rest = reward_adjusted_rest(g, None, r);
    let mut out = Vec::new();
    let mut walk = vec![g.start()];
    fn go(g: &TaskGraph, beta: &Rational, rest: &[Option<Rational>], walk: &mut Vec<NodeId>, out: &mut Vec<Option<Vec<NodeId>>>) {
        let u = *walk.last().unwrap();
        if u == g.target() {
            out.push(Some(walk.clone()));
            return;
        }
        let evals: Vec<(NodeId, Rational)> = g
            .out_edges(u)
            .iter()
            .filter_map(|&e| {
                let edge = g.edge(e);
                rest[edge.to].as_ref().map(|q| (edge.to, &edge.cost + beta * q))
            })
            .collect();
        let best = evals.iter().map(|(_, q)| q).min();
        match best {
            Some(b) if !b.is_positive() => {
                for (v, q) in &evals {
                    if q == b {
                        walk.push(*v);
                        go(g, beta, rest, walk, out);
                        walk.pop();
                    }
                }
            }
            _ => out.push(None),
        }
    }
    go(g, beta, &rest, &mut walk, &mut out);
    out
}

/// Fills `units[at..]` with every split of `left` into parts `<= cap`,
/// stopping at the first vector accepted by `hit`.
fn compositions(units: &mut [usize], at: usize, left: usize, cap: usize, hit: &dyn Fn(&[usize]) -> bool) -> bool {
    if at == units.len() {
        return left == 0 && hit(units);
    }
    let room = cap * (units.len() - at - 1);
    let lo = left.saturating_sub(room);
    for k in (lo..=left.min(cap)).rev() {
        units[at] = k;
        if compositions(units, at + 1, left - k, cap, hit) {
            return true;
        }
    }
    units[at] = 0;
    false
}

/// Cross-checks the walk's continue/abandon decisions against the
/// path-sum form: at `u`, `min c' <= 0` iff some `u -> t` path `Q` has
/// `c(e_1) / beta + sum_{e != e_1} c(e) <= sum_{v in Q, v != u} r(v)`.
/// Both sides are computed by explicit path enumeration.
pub fn decisions_match_path_sums(g: &TaskGraph, beta: &Rational, rw: &RewardConfig, traj: &Trajectory) -> bool {
    let r = |v: NodeId| rw.get(g.id(v));
    let cost = |a: NodeId, b: NodeId| g.edge(g.find_edge(a, b).expect("path edge")).cost.clone();
    traj.steps.iter().all(|step| {
        let paths = g.paths_to_target(step.node, usize::MAX);
        let perceived_ok = paths
            .iter()
            .map(|q| {
                let rest: Rational = q.windows(2).skip(1).map(|w| cost(w[0], w[1]) - r(w[1])).sum();
                cost(q[0], q[1]) + beta * (rest - r(q[1]))
            })
            .min()
            .is_some_and(|m| !m.is_positive());
        let sums_ok = paths.iter().any(|q| {
            let lhs: Rational = cost(q[0], q[1]) / beta + q.windows(2).skip(1).map(|w| cost(w[0], w[1])).sum::<Rational>();
            let rhs: Rational = q[1..].iter().map(|&v| r(v)).sum();
            lhs <= rhs
        });
        perceived_ok == sums_ok && perceived_ok == step.next.is_some()
    })
}
