//! Weighted task graphs: validated DAGs with exact rational edge costs.

use std::collections::{BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{render, Rational};

/// Dense node index into [`TaskGraph::nodes`].
pub type NodeId = usize;
/// Dense edge index into [`TaskGraph::edges`].
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("cycle detected through node `{0}`")]
    CycleDetected(String),
    #[error("edge {from} -> {to} has negative cost {cost}")]
    NegativeCost { from: String, to: String, cost: String },
    #[error("unknown node `{0}`")]
    MissingEndpoint(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("start node not set")]
    NoStart,
    #[error("target node not set")]
    NoTarget,
    #[error("no path from `{0}` to `{1}`")]
    Unreachable(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub cost: Rational,
}

/// An immutable, validated task graph.
///
/// Out-edge lists are sorted by the target's id string so that every
/// lexicographic tie-break in the crate reduces to "first in the list".
#[derive(Debug, Clone)]
pub struct TaskGraph {
    name: String,
    nodes: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    start: NodeId,
    target: NodeId,
    goal_reward: Option<Rational>,
    topo: Vec<NodeId>,
    to_target: Vec<Option<Rational>>,
}

impl PartialEq for TaskGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.start == other.start
            && self.target == other.target
            && self.goal_reward == other.goal_reward
    }
}

impl Eq for TaskGraph {}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    name: String,
    nodes: Vec<String>,
    edges: Vec<(String, String, Rational)>,
    start: Option<String>,
    target: Option<String>,
    goal_reward: Option<Rational>,
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        GraphBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn set_name(&mut self, name: impl Into<String>) -> &mut Self {
        self.name = name.into();
        self
    }

    pub fn node(&mut self, id: impl Into<String>) -> &mut Self {
        self.nodes.push(id.into());
        self
    }

    pub fn edge(&mut self, from: impl Into<String>, to: impl Into<String>, cost: Rational) -> &mut Self {
        self.edges.push((from.into(), to.into(), cost));
        self
    }

    pub fn start(&mut self, id: impl Into<String>) -> &mut Self {
        self.start = Some(id.into());
        self
    }

    pub fn target(&mut self, id: impl Into<String>) -> &mut Self {
        self.target = Some(id.into());
        self
    }

    pub fn goal_reward(&mut self, r: Option<Rational>) -> &mut Self {
        self.goal_reward = r;
        self
    }

    pub fn build(&self) -> Result<TaskGraph, GraphError> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        for (i, id) in self.nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::MissingEndpoint(id.to_string()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for (from, to, cost) in &self.edges {
            let (f, t) = (lookup(from)?, lookup(to)?);
            if cost.is_negative() {
                return Err(GraphError::NegativeCost {
                    from: from.clone(),
                    to: to.clone(),
                    cost: render(cost),
                });
            }
            if !seen.insert((f, t)) {
                return Err(GraphError::DuplicateEdge(from.clone(), to.clone()));
            }
            edges.push(Edge { from: f, to: t, cost: cost.clone() });
        }
        let start = lookup(self.start.as_deref().ok_or(GraphError::NoStart)?)?;
        let target = lookup(self.target.as_deref().ok_or(GraphError::NoTarget)?)?;
        TaskGraph::assemble(
            self.name.clone(),
            self.nodes.clone(),
            index,
            edges,
            start,
            target,
            self.goal_reward.clone(),
        )
    }
}

impl TaskGraph {
    pub fn builder(name: impl Into<String>) -> GraphBuilder {
        GraphBuilder::new(name)
    }

    fn assemble(
        name: String,
        nodes: Vec<String>,
        index: HashMap<String, NodeId>,
        edges: Vec<Edge>,
        start: NodeId,
        target: NodeId,
        goal_reward: Option<Rational>,
    ) -> Result<TaskGraph, GraphError> {
        let n = nodes.len();
        let mut out = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (id, e) in edges.iter().enumerate() {
            out[e.from].push(id);
            indeg[e.to] += 1;
        }
        for list in &mut out {
            list.sort_by(|&a, &b| nodes[edges[a].to].cmp(&nodes[edges[b].to]));
        }
        // Kahn's algorithm; a leftover node sits on (or behind) a cycle.
        let mut topo = Vec::with_capacity(n);
        let mut ready: Vec<NodeId> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
        while let Some(v) = ready.pop() {
            topo.push(v);
            for &e in out[v].iter().rev() {
                let w = edges[e].to;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        if topo.len() != n {
            let stuck = (0..n).find(|&v| indeg[v] > 0).expect("some node left");
            return Err(GraphError::CycleDetected(nodes[stuck].clone()));
        }
        let mut g = TaskGraph {
            name,
            nodes,
            index,
            edges,
            out,
            start,
            target,
            goal_reward,
            topo,
            to_target: Vec::new(),
        };
        g.to_target = g.distances_to(target, None);
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Out-edges of `u`, ordered by target id.
    pub fn out_edges(&self, u: NodeId) -> &[EdgeId] {
        &self.out[u]
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn goal_reward(&self) -> Option<&Rational> {
        self.goal_reward.as_ref()
    }

    pub fn with_goal_reward(&self, r: Option<Rational>) -> TaskGraph {
        let mut g = self.clone();
        g.goal_reward = r;
        g
    }

    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo
    }

    pub fn id(&self, v: NodeId) -> &str {
        &self.nodes[v]
    }

    pub fn node(&self, id: &str) -> Option<NodeId> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<NodeId, GraphError> {
        self.node(id).ok_or_else(|| GraphError::MissingEndpoint(id.to_string()))
    }

    pub fn find_edge(&self, from: NodeId, to: NodeId) -> Option<EdgeId> {
        self.out[from].iter().copied().find(|&e| self.edges[e].to == to)
    }

    /// Re-checks every structural invariant. Construction already enforces
    /// them, so this only fails for graphs assembled by hand elsewhere.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut b = TaskGraph::builder(self.name.clone());
        for v in &self.nodes {
            b.node(v.clone());
        }
        for e in &self.edges {
            b.edge(self.id(e.from), self.id(e.to), e.cost.clone());
        }
        b.start(self.id(self.start)).target(self.id(self.target));
        b.build().map(|_| ())
    }

    /// `d(v, t)` for every node `v`, or `None` where `t` is unreachable.
    pub fn dist_to_target(&self) -> &[Option<Rational>] {
        &self.to_target
    }

    /// Min-cost distance from every node to `dest`, restricted to edges with
    /// `mask[e] == true` when a mask is given.
    pub fn distances_to(&self, dest: NodeId, mask: Option<&[bool]>) -> Vec<Option<Rational>> {
        let mut d: Vec<Option<Rational>> = vec![None; self.nodes.len()];
        d[dest] = Some(Rational::zero());
        for &u in self.topo.iter().rev() {
            if u == dest {
                continue;
            }
            let mut best: Option<Rational> = None;
            for &e in &self.out[u] {
                if mask.is_some_and(|m| !m[e]) {
                    continue;
                }
                let edge = &self.edges[e];
                if let Some(rest) = &d[edge.to] {
                    let cand = &edge.cost + rest;
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
            d[u] = best;
        }
        d
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> Result<Rational, GraphError> {
        let d = if v == self.target {
            self.to_target[u].clone()
        } else {
            self.distances_to(v, None)[u].clone()
        };
        d.ok_or_else(|| GraphError::Unreachable(self.id(u).into(), self.id(v).into()))
    }

    /// The canonical min-cost `u -> v` path: at every node, the
    /// lexicographically smallest next node among the minimizers.
    pub fn min_cost_path(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>, GraphError> {
        let owned;
        let d: &[Option<Rational>] = if v == self.target {
            &self.to_target
        } else {
            owned = self.distances_to(v, None);
            &owned
        };
        canonical_path(self, d, u, v, None)
            .ok_or_else(|| GraphError::Unreachable(self.id(u).into(), self.id(v).into()))
    }

    /// Cost of an explicit node sequence, or `None` if some hop is not an edge.
    pub fn path_cost(&self, path: &[NodeId]) -> Option<Rational> {
        let mut total = Rational::zero();
        for pair in path.windows(2) {
            total += &self.edges[self.find_edge(pair[0], pair[1])?].cost;
        }
        Some(total)
    }

    /// All simple `u -> t` paths (DAG, so all paths), in lexicographic order of
    /// next-node ids, stopping once `limit` paths have been produced.
    pub fn paths_to_target(&self, u: NodeId, limit: usize) -> Vec<Vec<NodeId>> {
        let mut acc = Vec::new();
        let mut stack = vec![u];
        self.collect_paths(&mut stack, limit, &mut acc);
        acc
    }

    fn collect_paths(&self, stack: &mut Vec<NodeId>, limit: usize, acc: &mut Vec<Vec<NodeId>>) {
        if acc.len() >= limit {
            return;
        }
        let u = *stack.last().expect("non-empty");
        if u == self.target {
            acc.push(stack.clone());
            return;
        }
        for &e in &self.out[u] {
            let w = self.edges[e].to;
            if self.to_target[w].is_none() {
                continue;
            }
            stack.push(w);
            self.collect_paths(stack, limit, acc);
            stack.pop();
        }
    }
}

/// Follows minimizers of `c(x, y) + d(y) == d(x)` from `u` until `v`.
pub(crate) fn canonical_path(
    g: &TaskGraph,
    d: &[Option<Rational>],
    u: NodeId,
    v: NodeId,
    mask: Option<&[bool]>,
) -> Option<Vec<NodeId>> {
    d[u].as_ref()?;
    let mut path = vec![u];
    let mut cur = u;
    while cur != v {
        let here = d[cur].as_ref()?;
        let next = g.out[cur].iter().copied().find_map(|e| {
            if mask.is_some_and(|m| !m[e]) {
                return None;
            }
            let edge = &g.edges[e];
            let rest = d[edge.to].as_ref()?;
            (&edge.cost + rest == *here).then_some(edge.to)
        })?;
        path.push(next);
        cur = next;
    }
    Some(path)
}

/// An edge subset of a parent graph. Kept nodes are the endpoints of kept
/// edges plus `s` and `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgraph {
    pub kept_edges: BTreeSet<EdgeId>,
    pub kept_nodes: BTreeSet<NodeId>,
}

impl Subgraph {
    pub fn full(g: &TaskGraph) -> Self {
        Self::from_edges(g, 0..g.edges.len())
    }

    pub fn from_edges(g: &TaskGraph, edges: impl IntoIterator<Item = EdgeId>) -> Self {
        let kept_edges: BTreeSet<EdgeId> = edges.into_iter().collect();
        let mut kept_nodes: BTreeSet<NodeId> = [g.start, g.target].into_iter().collect();
        for &e in &kept_edges {
            kept_nodes.insert(g.edges[e].from);
            kept_nodes.insert(g.edges[e].to);
        }
        Subgraph { kept_edges, kept_nodes }
    }

    pub fn from_mask(g: &TaskGraph, mask: &[bool]) -> Self {
        Self::from_edges(g, (0..g.edges.len()).filter(|&e| mask[e]))
    }

    pub fn mask(&self, g: &TaskGraph) -> Vec<bool> {
        let mut m = vec![false; g.edges.len()];
        for &e in &self.kept_edges {
            m[e] = true;
        }
        m
    }

    pub fn without_edge(&self, g: &TaskGraph, e: EdgeId) -> Self {
        Self::from_edges(g, self.kept_edges.iter().copied().filter(|&x| x != e))
    }

    /// Materializes the subgraph as a standalone task graph, preserving the
    /// parent's node and edge order.
    pub fn induced(&self, g: &TaskGraph) -> TaskGraph {
        let mut b = TaskGraph::builder(g.name.clone());
        for &v in &self.kept_nodes {
            b.node(g.id(v));
        }
        for &e in &self.kept_edges {
            let edge = &g.edges[e];
            b.edge(g.id(edge.from), g.id(edge.to), edge.cost.clone());
        }
        b.start(g.id(g.start))
            .target(g.id(g.target))
            .goal_reward(g.goal_reward.clone());
        b.build().expect("a subgraph of a valid graph is valid")
    }
}
