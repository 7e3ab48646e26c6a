//! Motivating subgraphs: edge subsets in which the goal-reward agent reaches
//! `t` instead of abandoning.
//!
//! Searches walk the lattice of edge subsets downward from the full set.
//! Two observations keep this tractable on desk-scale graphs:
//!
//! * Only edges on some `s -> t` path of a subset (its *trim*) affect the
//!   walk, so simulations are memoized by trim and only trimmed edges are
//!   ever removed.
//! * In any `H` inside an upper set `U`, the agent only traverses edges with
//!   `c(u, v) + beta * d_U(v) <= beta * r`, because `d_H >= d_U`. If those
//!   edges do not connect `s` to `t`, nothing below `U` is motivating.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::agent::{walk, AgentConfig, Model};
use crate::graph::{EdgeId, NodeId, Subgraph, TaskGraph};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchOrder {
    /// Level by level from the full set; the first hit has maximum size.
    #[default]
    DecreasingSize,
    /// Depth-first; returns whichever motivating subset it meets first.
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of agent simulations.
    pub budget: u64,
    pub order: SearchOrder,
    /// Edges never removed (for instances where they are known to belong to
    /// every motivating subgraph).
    pub forced: BTreeSet<EdgeId>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 1_000_000, order: SearchOrder::DecreasingSize, forced: BTreeSet::new() }
    }
}

impl SearchOptions {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_order(mut self, order: SearchOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_forced(mut self, forced: impl IntoIterator<Item = EdgeId>) -> Self {
        self.forced = forced.into_iter().collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes_explored: u64,
    pub oracle_calls: u64,
}

impl SearchStats {
    fn absorb(&mut self, other: SearchStats) {
        self.nodes_explored += other.nodes_explored;
        self.oracle_calls += other.oracle_calls;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchStatus {
    Found(Subgraph),
    NoneExists,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotivatingSearchResult {
    pub status: SearchStatus,
    pub stats: SearchStats,
}

impl MotivatingSearchResult {
    pub fn found(&self) -> Option<&Subgraph> {
        match &self.status {
            SearchStatus::Found(s) => Some(s),
            SearchStatus::NoneExists => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MotivatingError {
    #[error("goal reward required")]
    MissingGoalReward,
    #[error("budget of {budget} simulations exceeded")]
    BudgetExceeded { budget: u64, stats: SearchStats },
    #[error("node `{0}` has more than two outgoing edges in a minimal motivating subgraph")]
    OutDegree(String),
}

fn goal_reward<'a>(g: &'a TaskGraph, cfg: &'a AgentConfig) -> Result<&'a Rational, MotivatingError> {
    cfg.goal_reward.as_ref().or(g.goal_reward()).ok_or(MotivatingError::MissingGoalReward)
}

fn reaches(g: &TaskGraph, mask: &[bool], r: &Rational, cfg: &AgentConfig) -> bool {
    walk(g, Some(mask), cfg, Model::Goal(r)).reached()
}

/// Whether the agent reaches `t` inside `sub`.
pub fn is_motivating(g: &TaskGraph, sub: &Subgraph, cfg: &AgentConfig) -> Result<bool, MotivatingError> {
    let r = goal_reward(g, cfg)?;
    Ok(reaches(g, &sub.mask(g), r, cfg))
}

/// Edges of `mask` lying on some `s -> t` path within `mask`.
fn trim(g: &TaskGraph, mask: &[bool]) -> Vec<bool> {
    let n = g.node_count();
    let mut fwd = vec![false; n];
    fwd[g.start()] = true;
    for &u in g.topo_order() {
        if fwd[u] {
            for &e in g.out_edges(u) {
                if mask[e] {
                    fwd[g.edge(e).to] = true;
                }
            }
        }
    }
    let mut back = vec![false; n];
    back[g.target()] = true;
    for &u in g.topo_order().iter().rev() {
        for &e in g.out_edges(u) {
            if mask[e] && back[g.edge(e).to] {
                back[u] = true;
            }
        }
    }
    (0..mask.len()).map(|e| mask[e] && fwd[g.edge(e).from] && back[g.edge(e).to]).collect()
}

/// Necessary condition for some subset of `mask` to be motivating.
fn may_contain_motivating(g: &TaskGraph, mask: &[bool], threshold: &Rational, beta: &Rational) -> bool {
    let d = g.distances_to(g.target(), Some(mask));
    let mut seen = vec![false; g.node_count()];
    seen[g.start()] = true;
    let mut stack = vec![g.start()];
    while let Some(u) = stack.pop() {
        if u == g.target() {
            return true;
        }
        for &e in g.out_edges(u) {
            let edge = g.edge(e);
            if !mask[e] || seen[edge.to] {
                continue;
            }
            if d[edge.to].as_ref().is_some_and(|dv| &edge.cost + beta * dv <= *threshold) {
                seen[edge.to] = true;
                stack.push(edge.to);
            }
        }
    }
    false
}

struct Searcher<'a> {
    g: &'a TaskGraph,
    cfg: &'a AgentConfig,
    reward: &'a Rational,
    threshold: Rational,
    opts: &'a SearchOptions,
    memo: HashMap<Vec<bool>, Verdict>,
    /// Trims known to have no motivating subset.
    explored: HashSet<Vec<bool>>,
    stats: SearchStats,
}

#[derive(Clone, Copy)]
enum Verdict {
    Hit,
    Miss,
    Pruned,
}

enum Visit {
    Hit,
    Miss(Vec<bool>),
    Pruned,
}

impl Searcher<'_> {
    fn visit(&mut self, mask: &[bool]) -> Result<Visit, MotivatingError> {
        self.stats.nodes_explored += 1;
        let t = trim(self.g, mask);
        let verdict = match self.memo.get(&t) {
            Some(&v) => v,
            None => {
                let v = if !may_contain_motivating(self.g, &t, &self.threshold, &self.cfg.beta) {
                    Verdict::Pruned
                } else {
                    if self.stats.oracle_calls >= self.opts.budget {
                        return Err(MotivatingError::BudgetExceeded { budget: self.opts.budget, stats: self.stats });
                    }
                    self.stats.oracle_calls += 1;
                    if reaches(self.g, &t, self.reward, self.cfg) {
                        Verdict::Hit
                    } else {
                        Verdict::Miss
                    }
                };
                self.memo.insert(t.clone(), v);
                v
            }
        };
        Ok(match verdict {
            Verdict::Hit => Visit::Hit,
            Verdict::Miss => Visit::Miss(t),
            Verdict::Pruned => Visit::Pruned,
        })
    }

    fn children(&self, trimmed: &[bool], last: Option<usize>) -> Vec<usize> {
        let from = last.map_or(0, |l| l + 1);
        (from..trimmed.len()).filter(|&e| trimmed[e] && !self.opts.forced.contains(&e)).collect()
    }

    /// Whether some subset of `mask` is motivating, leaving such a subset in
    /// `mask` on success. Results are memoized per trim, since a set and its
    /// trim have the same motivating subsets up to unused edges.
    fn depth_first(&mut self, mask: &mut Vec<bool>) -> Result<bool, MotivatingError> {
        let trimmed = match self.visit(mask)? {
            Visit::Hit => return Ok(true),
            Visit::Pruned => return Ok(false),
            Visit::Miss(t) => t,
        };
        if self.explored.contains(&trimmed) {
            return Ok(false);
        }
        for e in self.children(&trimmed, None) {
            mask[e] = false;
            if self.depth_first(mask)? {
                return Ok(true);
            }
            mask[e] = true;
        }
        self.explored.insert(trimmed);
        Ok(false)
    }

    fn breadth_first(&mut self, root: Vec<bool>) -> Result<Option<Vec<bool>>, MotivatingError> {
        let mut level: VecDeque<(Vec<bool>, Option<usize>)> = VecDeque::from([(root, None)]);
        while !level.is_empty() {
            let mut next = VecDeque::new();
            for (mask, last) in level {
                match self.visit(&mask)? {
                    Visit::Hit => return Ok(Some(mask)),
                    Visit::Pruned => {}
                    Visit::Miss(trimmed) => {
                        for e in self.children(&trimmed, last) {
                            let mut child = mask.clone();
                            child[e] = false;
                            next.push_back((child, Some(e)));
                        }
                    }
                }
            }
            level = next;
        }
        Ok(None)
    }
}

/// Exhaustive search below `within` (the whole graph if `None`).
pub fn find_motivating_subgraph_within(
    g: &TaskGraph,
    within: Option<&Subgraph>,
    cfg: &AgentConfig,
    opts: &SearchOptions,
) -> Result<MotivatingSearchResult, MotivatingError> {
    let reward = goal_reward(g, cfg)?;
    let mut s = Searcher {
        g,
        cfg,
        reward,
        threshold: &cfg.beta * reward,
        opts,
        memo: HashMap::new(),
        explored: HashSet::new(),
        stats: SearchStats::default(),
    };
    let mut root = within.map_or_else(|| vec![true; g.edges().len()], |w| w.mask(g));
    let found = match opts.order {
        SearchOrder::Any => s.depth_first(&mut root)?.then_some(root),
        SearchOrder::DecreasingSize => s.breadth_first(root)?,
    };
    let status = match found {
        Some(mask) => SearchStatus::Found(Subgraph::from_mask(g, &mask)),
        None => SearchStatus::NoneExists,
    };
    Ok(MotivatingSearchResult { status, stats: s.stats })
}

pub fn find_motivating_subgraph(
    g: &TaskGraph,
    cfg: &AgentConfig,
    opts: &SearchOptions,
) -> Result<MotivatingSearchResult, MotivatingError> {
    find_motivating_subgraph_within(g, None, cfg, opts)
}

/// Greedy loop: walk the edges in lexicographic `(from, to)` order and drop
/// each one whose removal still leaves some motivating subgraph. One pass
/// suffices, since later removals only shrink the graph. The result is then
/// checked against the two-out-edges property.
pub fn find_minimal_motivating_subgraph(
    g: &TaskGraph,
    cfg: &AgentConfig,
    opts: &SearchOptions,
) -> Result<MotivatingSearchResult, MotivatingError> {
    let inner = opts.clone().with_order(SearchOrder::Any);
    let mut stats = SearchStats::default();
    let remaining = |stats: &SearchStats| SearchOptions { budget: opts.budget.saturating_sub(stats.oracle_calls), ..inner.clone() };
    let first = find_motivating_subgraph(g, cfg, &remaining(&stats)).map_err(|e| with_total(e, &stats))?;
    stats.absorb(first.stats);
    if first.found().is_none() {
        return Ok(MotivatingSearchResult { status: SearchStatus::NoneExists, stats });
    }
    let mut current = Subgraph::full(g);
    for e in lexicographic_edges(g) {
        if opts.forced.contains(&e) {
            continue;
        }
        let candidate = current.without_edge(g, e);
        let res = find_motivating_subgraph_within(g, Some(&candidate), cfg, &remaining(&stats))
            .map_err(|err| with_total(err, &stats))?;
        stats.absorb(res.stats);
        if res.found().is_some() {
            current = candidate;
        }
    }
    if let Some(v) = out_degree_violations(g, &current).first() {
        return Err(MotivatingError::OutDegree(g.id(*v).to_string()));
    }
    Ok(MotivatingSearchResult { status: SearchStatus::Found(current), stats })
}

fn with_total(err: MotivatingError, before: &SearchStats) -> MotivatingError {
    match err {
        MotivatingError::BudgetExceeded { stats, .. } => {
            let mut total = *before;
            total.absorb(stats);
            MotivatingError::BudgetExceeded { budget: total.oracle_calls, stats: total }
        }
        other => other,
    }
}

fn lexicographic_edges(g: &TaskGraph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = (0..g.edges().len()).collect();
    ids.sort_by(|&a, &b| {
        let (ea, eb) = (g.edge(a), g.edge(b));
        (g.id(ea.from), g.id(ea.to)).cmp(&(g.id(eb.from), g.id(eb.to)))
    });
    ids
}

/// True iff `sub` is motivating and no single-edge deletion leaves a
/// motivating subgraph. Deleting a node deletes its edges, so edge deletions
/// cover every proper subgraph.
pub fn check_minimality(
    g: &TaskGraph,
    sub: &Subgraph,
    cfg: &AgentConfig,
    opts: &SearchOptions,
) -> Result<bool, MotivatingError> {
    if !is_motivating(g, sub, cfg)? {
        return Ok(false);
    }
    let inner = opts.clone().with_order(SearchOrder::Any);
    for &e in &sub.kept_edges {
        let res = find_motivating_subgraph_within(g, Some(&sub.without_edge(g, e)), cfg, &inner)?;
        if res.found().is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Nodes with more than two kept outgoing edges.
pub fn out_degree_violations(g: &TaskGraph, sub: &Subgraph) -> Vec<NodeId> {
    let mut count = vec![0usize; g.node_count()];
    for &e in &sub.kept_edges {
        count[g.edge(e).from] += 1;
    }
    (0..g.node_count()).filter(|&v| count[v] > 2).collect()
}

/// Renders `sub` in the graph text format, marking kept edges of the parent.
pub fn render_subgraph(g: &TaskGraph, sub: &Subgraph) -> String {
    let induced = sub.induced(g);
    crate::text::render_annotated(&induced, |_| None, |_| Some("kept-edge".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn graph(edges: &[(&str, &str, i64)], reward: i64) -> TaskGraph {
        let mut b = TaskGraph::builder("g");
        let mut seen = BTreeSet::new();
        for (u, v, c) in edges {
            for x in [*u, *v] {
                if seen.insert(x) {
                    b.node(x);
                }
            }
            b.edge(*u, *v, int(*c));
        }
        b.start("s").target("t").goal_reward(Some(int(reward))).build().unwrap()
    }

    fn cfg() -> AgentConfig {
        AgentConfig::new(ratio(1, 2)).unwrap()
    }

    #[test]
    fn motivating_graph_returns_itself() {
        let g = graph(&[("s", "a", 1), ("a", "t", 1), ("s", "t", 3)], 10);
        let res = find_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        assert_eq!(res.found(), Some(&Subgraph::full(&g)));
        assert_eq!(res.stats.oracle_calls, 1);
    }

    #[test]
    fn zero_reward_positive_costs_has_none() {
        let g = graph(&[("s", "a", 1), ("a", "t", 1), ("s", "t", 3)], 0);
        for order in [SearchOrder::DecreasingSize, SearchOrder::Any] {
            let res = find_motivating_subgraph(&g, &cfg(), &SearchOptions::default().with_order(order)).unwrap();
            assert_eq!(res.status, SearchStatus::NoneExists);
        }
        let min = find_minimal_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        assert_eq!(min.status, SearchStatus::NoneExists);
    }

    #[test]
    fn removing_a_lure_motivates() {
        // With `s -> l` present the agent heads for the lure and then quits.
        // Perceived at s: via l = 0 + 1/2 * 2 = 1, via a = 1 + 1/2 * 2 = 2.
        // At l: 4 > beta * r = 3/2. Without the lure: 2 > 3/2 as well, so
        // a cheaper route is needed: a -> t cost 1 gives 1 + 1/2 = 3/2 <= 3/2.
        let g = graph(&[("s", "l", 0), ("l", "t", 4), ("l", "m", 0), ("m", "t", 2), ("s", "a", 1), ("a", "t", 1)], 3);
        assert!(!is_motivating(&g, &Subgraph::full(&g), &cfg()).unwrap());
        let res = find_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        let sub = res.found().expect("motivating subgraph exists").clone();
        assert!(is_motivating(&g, &sub, &cfg()).unwrap());
        let min = find_minimal_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        let min = min.found().unwrap();
        assert!(check_minimality(&g, min, &cfg(), &SearchOptions::default()).unwrap());
        assert!(min.kept_edges.len() <= sub.kept_edges.len());
    }

    #[test]
    fn dangling_edge_is_dropped() {
        let g = graph(&[("s", "t", 1), ("s", "x", 5)], 4);
        let min = find_minimal_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        let min = min.found().unwrap();
        assert_eq!(min.kept_edges.len(), 1);
        assert!(!min.kept_nodes.contains(&g.node("x").unwrap()));
        assert!(!check_minimality(&g, &Subgraph::full(&g), &cfg(), &SearchOptions::default()).unwrap());
        assert!(check_minimality(&g, min, &cfg(), &SearchOptions::default()).unwrap());
    }

    #[test]
    fn single_edge_is_minimal() {
        let g = graph(&[("s", "t", 1)], 2);
        let min = find_minimal_motivating_subgraph(&g, &cfg(), &SearchOptions::default()).unwrap();
        assert_eq!(min.found(), Some(&Subgraph::full(&g)));
        assert!(check_minimality(&g, &Subgraph::full(&g), &cfg(), &SearchOptions::default()).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let g = graph(&[("s", "l", 0), ("l", "t", 4), ("l", "m", 0), ("m", "t", 2), ("s", "a", 1), ("a", "t", 1)], 3);
        let err = find_motivating_subgraph(&g, &cfg(), &SearchOptions::default().with_budget(1)).unwrap_err();
        assert!(matches!(err, MotivatingError::BudgetExceeded { .. }));
    }

    #[test]
    fn missing_reward_is_an_error() {
        let mut b = TaskGraph::builder("g");
        b.node("s").node("t").edge("s", "t", int(1)).start("s").target("t");
        let g = b.build().unwrap();
        assert_eq!(is_motivating(&g, &Subgraph::full(&g), &cfg()), Err(MotivatingError::MissingGoalReward));
    }
}
