//! The naive present-biased agent.
//!
//! At node `u` the agent scores each out-neighbor `v` by the perceived cost
//! `c(u, v) + beta * rest(v)` and moves to a minimizer. Three variants differ
//! only in `rest` and in when the agent gives up:
//!
//! * plain: `rest = d(v)`, never gives up;
//! * goal reward `r`: same scores, abandons at `u` when the best score is
//!   strictly greater than `beta * r`;
//! * node rewards: `rest(v)` is the min over `v -> t` paths of
//!   `sum (c(x, x') - r(x))` with `c(t, t') = 0`, abandoning when the best
//!   score is strictly positive.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, NodeId, TaskGraph};
use crate::rational::{render, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("target is unreachable from `{0}`")]
    TargetUnreachable(String),
    #[error("beta must lie in (0, 1], got {0}")]
    BadBeta(String),
    #[error("goal reward required for this model")]
    MissingGoalReward,
    #[error("optimal cost is zero; cost ratio undefined")]
    ZeroOptimalCost,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest next-node id.
    #[default]
    Lexicographic,
    /// Prefer an edge that is not on any min-cost path, then smallest id.
    Procrastinate,
    /// Earlier entries win; unlisted nodes follow in id order.
    Custom(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentConfig {
    pub beta: Rational,
    pub tie_break: TieBreak,
    pub goal_reward: Option<Rational>,
}

impl AgentConfig {
    pub fn new(beta: Rational) -> Result<Self, AgentError> {
        if !beta.is_positive() || beta > Rational::one() {
            return Err(AgentError::BadBeta(render(&beta)));
        }
        Ok(AgentConfig { beta, tie_break: TieBreak::Lexicographic, goal_reward: None })
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_goal_reward(mut self, r: Rational) -> Self {
        self.goal_reward = Some(r);
        self
    }
}

/// Node rewards keyed by node id; absent nodes carry zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RewardConfig {
    rewards: BTreeMap<String, Rational>,
}

impl RewardConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `value`; zero removes the entry.
    pub fn set(&mut self, node: impl Into<String>, value: Rational) {
        let node = node.into();
        if value.is_zero() {
            self.rewards.remove(&node);
        } else {
            self.rewards.insert(node, value);
        }
    }

    pub fn get(&self, node: &str) -> Rational {
        self.rewards.get(node).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.rewards.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Sum of absolute values.
    pub fn total_abs(&self) -> Rational {
        self.rewards.values().fold(Rational::zero(), |acc, v| acc + v.abs())
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> RewardConfig {
        let mut out = RewardConfig::new();
        for (k, v) in &self.rewards {
            out.set(k.clone(), v * factor);
        }
        out
    }

    pub(crate) fn per_node(&self, g: &TaskGraph) -> Vec<Rational> {
        (0..g.node_count()).map(|v| self.get(g.id(v))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Reached,
    Abandoned(NodeId),
    Stuck(NodeId),
}

/// One decision of the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub node: NodeId,
    /// `None` when the agent stopped here.
    pub next: Option<NodeId>,
    /// Perceived value of every viable out-neighbor, in id order.
    pub evaluations: Vec<(NodeId, Rational)>,
    /// More than one neighbor attained the minimum.
    pub tied: bool,
    /// Reward collected on arriving at `next`.
    pub claimed: Rational,
}

impl Step {
    pub fn best_value(&self) -> Option<&Rational> {
        self.evaluations.iter().map(|(_, v)| v).min()
    }

    pub fn chosen_value(&self) -> Option<&Rational> {
        let next = self.next?;
        self.evaluations.iter().find(|(v, _)| *v == next).map(|(_, q)| q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub nodes: Vec<NodeId>,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
    pub total_cost: Rational,
    pub total_claimed_reward: Rational,
}

impl Trajectory {
    pub fn reached(&self) -> bool {
        self.outcome == Outcome::Reached
    }

    /// `step <node> <next> <value>` lines followed by the outcome line.
    pub fn render_lines(&self, g: &TaskGraph) -> String {
        let mut out = String::new();
        for step in &self.steps {
            if let (Some(next), Some(value)) = (step.next, step.chosen_value()) {
                writeln!(out, "step {} {} {}", g.id(step.node), g.id(next), Frac(value)).unwrap();
            }
        }
        writeln!(out, "{}", self.outcome_line(g)).unwrap();
        out
    }

    pub fn outcome_line(&self, g: &TaskGraph) -> String {
        match self.outcome {
            Outcome::Reached => "outcome reached".to_string(),
            Outcome::Abandoned(v) => format!("outcome abandoned {}", g.id(v)),
            Outcome::Stuck(v) => format!("outcome stuck {}", g.id(v)),
        }
    }

    /// Human-readable report: one line per step with its evaluation table.
    pub fn render_report(&self, g: &TaskGraph) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let table: Vec<String> = step
                .evaluations
                .iter()
                .map(|(v, q)| format!("{}={}", g.id(*v), Frac(q)))
                .collect();
            let choice = match step.next {
                Some(n) => format!("-> {}", g.id(n)),
                None => "stop".to_string(),
            };
            let tie = if step.tied { " (tie)" } else { "" };
            writeln!(out, "at {}: {choice}{tie} | {}", g.id(step.node), table.join(" ")).unwrap();
        }
        let path: Vec<&str> = self.nodes.iter().map(|&v| g.id(v)).collect();
        writeln!(out, "path {}", path.join(" ")).unwrap();
        writeln!(out, "cost {}", Frac(&self.total_cost)).unwrap();
        writeln!(out, "claimed {}", Frac(&self.total_claimed_reward)).unwrap();
        writeln!(out, "{}", self.outcome_line(g)).unwrap();
        out
    }
}

/// How the walk scores neighbors and when it quits.
pub(crate) enum Model<'a> {
    Plain,
    Goal(&'a Rational),
    Rewards(&'a [Rational]),
}

/// Shared walk over the edges of `g` allowed by `mask`.
pub(crate) fn walk(
    g: &TaskGraph,
    mask: Option<&[bool]>,
    cfg: &AgentConfig,
    model: Model<'_>,
) -> Trajectory {
    let owned;
    let dist: &[Option<Rational>] = match mask {
        None => g.dist_to_target(),
        Some(_) => {
            owned = g.distances_to(g.target(), mask);
            &owned
        }
    };
    let rest_owned;
    let rest: &[Option<Rational>] = match &model {
        Model::Rewards(r) => {
            rest_owned = reward_adjusted_rest(g, mask, r);
            &rest_owned
        }
        _ => dist,
    };
    let threshold = match &model {
        Model::Plain => None,
        Model::Goal(r) => Some(&cfg.beta * *r),
        Model::Rewards(_) => Some(Rational::zero()),
    };
    let claim = |v: NodeId| match &model {
        Model::Rewards(r) => r[v].clone(),
        _ => Rational::zero(),
    };

    let mut cur = g.start();
    let mut traj = Trajectory {
        nodes: vec![cur],
        steps: Vec::new(),
        outcome: Outcome::Reached,
        total_cost: Rational::zero(),
        total_claimed_reward: claim(cur),
    };
    while cur != g.target() {
        let mut evals: Vec<(EdgeId, Rational)> = Vec::new();
        for &e in g.out_edges(cur) {
            if mask.is_some_and(|m| !m[e]) {
                continue;
            }
            let edge = g.edge(e);
            if let Some(r) = &rest[edge.to] {
                evals.push((e, &edge.cost + &cfg.beta * r));
            }
        }
        let evaluations = evals.iter().map(|(e, q)| (g.edge(*e).to, q.clone())).collect();
        let Some(best) = evals.iter().map(|(_, q)| q).min().cloned() else {
            traj.steps.push(Step { node: cur, next: None, evaluations, tied: false, claimed: Rational::zero() });
            traj.outcome = Outcome::Stuck(cur);
            break;
        };
        if threshold.as_ref().is_some_and(|th| best > *th) {
            traj.steps.push(Step { node: cur, next: None, evaluations, tied: false, claimed: Rational::zero() });
            traj.outcome = Outcome::Abandoned(cur);
            break;
        }
        let minimizers: Vec<EdgeId> = evals.iter().filter(|(_, q)| *q == best).map(|(e, _)| *e).collect();
        let chosen = break_tie(g, dist, cur, &minimizers, &cfg.tie_break);
        let edge = g.edge(chosen);
        let gained = claim(edge.to);
        traj.total_cost += &edge.cost;
        traj.total_claimed_reward += &gained;
        traj.steps.push(Step {
            node: cur,
            next: Some(edge.to),
            evaluations,
            tied: minimizers.len() > 1,
            claimed: gained,
        });
        cur = edge.to;
        traj.nodes.push(cur);
    }
    traj
}

/// For every node `v`, the min over `v -> t` paths of `sum (c(x,x') - r(x))`
/// over the path's nodes including `v` and `t` (with `c(t, t') = 0`).
pub(crate) fn reward_adjusted_rest(
    g: &TaskGraph,
    mask: Option<&[bool]>,
    rewards: &[Rational],
) -> Vec<Option<Rational>> {
    let mut rest: Vec<Option<Rational>> = vec![None; g.node_count()];
    rest[g.target()] = Some(-&rewards[g.target()]);
    for &u in g.topo_order().iter().rev() {
        if u == g.target() {
            continue;
        }
        let mut best: Option<Rational> = None;
        for &e in g.out_edges(u) {
            if mask.is_some_and(|m| !m[e]) {
                continue;
            }
            let edge = g.edge(e);
            if let Some(r) = &rest[edge.to] {
                let cand = &edge.cost + r;
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        rest[u] = best.map(|b| b - &rewards[u]);
    }
    rest
}

fn break_tie(
    g: &TaskGraph,
    dist: &[Option<Rational>],
    u: NodeId,
    minimizers: &[EdgeId],
    policy: &TieBreak,
) -> EdgeId {
    // `minimizers` inherits the out-list order, i.e. ascending target id.
    match policy {
        TieBreak::Lexicographic => minimizers[0],
        TieBreak::Procrastinate => {
            let on_min_path = |e: EdgeId| {
                let edge = g.edge(e);
                match (&dist[u], &dist[edge.to]) {
                    (Some(du), Some(dv)) => &edge.cost + dv == *du,
                    _ => false,
                }
            };
            minimizers.iter().copied().find(|&e| !on_min_path(e)).unwrap_or(minimizers[0])
        }
        TieBreak::Custom(order) => {
            let rank = |e: EdgeId| {
                let id = g.id(g.edge(e).to);
                order.iter().position(|o| o == id).unwrap_or(usize::MAX)
            };
            minimizers.iter().copied().min_by_key(|&e| rank(e)).expect("non-empty")
        }
    }
}

fn require_reachable(g: &TaskGraph) -> Result<(), AgentError> {
    if g.dist_to_target()[g.start()].is_none() {
        return Err(AgentError::TargetUnreachable(g.id(g.start()).to_string()));
    }
    Ok(())
}

/// Plain model: no rewards, the agent always reaches `t`.
pub fn simulate_plain(g: &TaskGraph, cfg: &AgentConfig) -> Result<Trajectory, AgentError> {
    require_reachable(g)?;
    Ok(walk(g, None, cfg, Model::Plain))
}

/// Goal-reward model. Uses `cfg.goal_reward`, falling back to the graph's
/// own `goalreward`.
pub fn simulate_with_goal_reward(g: &TaskGraph, cfg: &AgentConfig) -> Result<Trajectory, AgentError> {
    let r = cfg.goal_reward.as_ref().or(g.goal_reward()).ok_or(AgentError::MissingGoalReward)?;
    require_reachable(g)?;
    Ok(walk(g, None, cfg, Model::Goal(r)))
}

/// Intermediate-reward model; `cfg.goal_reward` is ignored (put the goal
/// reward on `t` in `rw` instead).
pub fn simulate_with_rewards(
    g: &TaskGraph,
    cfg: &AgentConfig,
    rw: &RewardConfig,
) -> Result<Trajectory, AgentError> {
    require_reachable(g)?;
    let per_node = rw.per_node(g);
    Ok(walk(g, None, cfg, Model::Rewards(&per_node)))
}

/// Actual cost of the plain agent's walk divided by `d(s, t)`.
pub fn cost_ratio(g: &TaskGraph, cfg: &AgentConfig) -> Result<Rational, AgentError> {
    let traj = simulate_plain(g, cfg)?;
    let opt = g.dist_to_target()[g.start()].clone().expect("checked reachable");
    if opt.is_zero() {
        return Err(AgentError::ZeroOptimalCost);
    }
    Ok(traj.total_cost / opt)
}
