//! 3-SAT to minimal motivating subgraph.
//!
//! A bus `s, u_1..u_m, w_1..w_l, t` of weight-`f` edges (the last one
//! `f + z - f l`) carries the agent; clause node `u_i` links to the node
//! `v_k` of each of its variables: weight 2 (expensive) for `x_k`,
//! `1 + beta` (cheap) for `~x_k`. Each `v_k` reaches the hub `w` by a cheap
//! path (`v_k -> w`, 0) or an expensive one (`v_k -> v_k' -> w`, `1 - beta`),
//! and `w -> t` is too costly to ever be walked. A minimal motivating
//! subgraph keeps one clause edge per `u_i` whose total to `w` is exactly 2,
//! which is a true literal under "cheap path kept iff `x_k` true".

use std::collections::BTreeSet;
use std::fmt::Write;

use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use super::cnf::{Assignment, Formula3Cnf};
use crate::agent::AgentConfig;
use crate::generators::BadParameter;
use crate::graph::{EdgeId, NodeId, Subgraph, TaskGraph};
use crate::motivating::{is_motivating, SearchOptions, SearchOrder};
use crate::rational::{ceil, int, ratio, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsConstants {
    pub f: Rational,
    pub z: Rational,
    pub ell: usize,
    pub r: Rational,
    /// Weight of the last bus edge `(w_l, t)`.
    pub last_bus: Rational,
    /// Weight of `(w, t)`.
    pub hub: Rational,
    pub expensive: Rational,
    pub cheap: Rational,
    /// Weight of `(v_k, v_k')`.
    pub expensive_path: Rational,
}

impl MmsConstants {
    pub fn new(beta: &Rational) -> Result<Self, BadParameter> {
        if !beta.is_positive() || *beta >= Rational::one() {
            return Err(BadParameter(format!("beta must lie in (0,1), got {}", Frac(beta))));
        }
        let one = Rational::one();
        let half = ratio(1, 2);
        let b2 = beta * beta;
        let slack = &one - beta;
        let f = &one - &half * beta - &half * &b2;
        let z = int(2) + ratio(3, 2) * beta + (&one + beta) / &slack;
        let ell = ceil(&(&z / &f)).to_usize().expect("small");
        let r = &one + &half * beta + beta.recip() + int(2) / &slack;
        let last_bus = &f + &z - &f * int(ell as i64);
        let hub = ratio(3, 2) * beta + (&one + beta) / &slack;
        Ok(MmsConstants { f, z, ell, r, last_bus, hub, expensive: int(2), cheap: &one + beta, expensive_path: slack })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "f {}", Frac(&self.f)).unwrap();
        writeln!(out, "z {}", Frac(&self.z)).unwrap();
        writeln!(out, "ell {}", self.ell).unwrap();
        writeln!(out, "r {}", Frac(&self.r)).unwrap();
        writeln!(out, "last_bus {}", Frac(&self.last_bus)).unwrap();
        writeln!(out, "hub {}", Frac(&self.hub)).unwrap();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsEdgeRole {
    Bus,
    /// Clause `i` to the node of positive literal `x_k`.
    Expensive { clause: usize, var: usize },
    /// Clause `i` to the node of negative literal `~x_k`.
    Cheap { clause: usize, var: usize },
    /// `v_k -> v_k'`, first half of the expensive path.
    ExpensivePath(usize),
    /// `v_k' -> w`.
    ExpensivePathEnd(usize),
    /// `v_k -> w`.
    CheapPath(usize),
    Hub,
}

impl MmsEdgeRole {
    fn label(&self) -> String {
        match self {
            MmsEdgeRole::Bus => "role: bus".into(),
            MmsEdgeRole::Expensive { clause, var } => format!("role: expensive edge, clause {clause}, x{var}"),
            MmsEdgeRole::Cheap { clause, var } => format!("role: cheap edge, clause {clause}, ~x{var}"),
            MmsEdgeRole::ExpensivePath(k) => format!("role: expensive path of x{k}"),
            MmsEdgeRole::ExpensivePathEnd(k) => format!("role: expensive path of x{k}"),
            MmsEdgeRole::CheapPath(k) => format!("role: cheap path of x{k}"),
            MmsEdgeRole::Hub => "role: hub exit".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsGadget {
    pub graph: TaskGraph,
    pub beta: Rational,
    pub formula: Formula3Cnf,
    pub constants: MmsConstants,
    pub edge_roles: Vec<MmsEdgeRole>,
    /// Clause node per formula clause; `None` for dropped tautologies.
    pub clause_nodes: Vec<Option<NodeId>>,
    /// Notes about deduplicated literals and dropped clauses.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MmsError {
    #[error("assignment does not satisfy the formula")]
    AssignmentNotSatisfying,
    #[error("subgraph is not a minimal motivating subgraph: {0}")]
    NotMinimalMotivating(String),
}

pub fn var_node(k: usize) -> String {
    format!("v{k}")
}

pub fn var_node_prime(k: usize) -> String {
    format!("v{k}'")
}

pub fn build_mms_gadget(f: &Formula3Cnf, beta: &Rational) -> Result<MmsGadget, BadParameter> {
    let c = MmsConstants::new(beta)?;
    let mut notes = Vec::new();
    let mut b = TaskGraph::builder("mms-gadget");
    let mut roles = Vec::new();
    let mut edge = |b: &mut crate::graph::GraphBuilder, u: &str, v: &str, w: &Rational, role: MmsEdgeRole| {
        b.edge(u, v, w.clone());
        roles.push(role);
    };

    let mut kept_clauses = Vec::new();
    for (i, clause) in f.clauses.iter().enumerate() {
        let tautology = clause.iter().any(|a| clause.iter().any(|b| a.var == b.var && a.positive != b.positive));
        if tautology {
            notes.push(format!("clause {} is a tautology and has no clause node", i + 1));
        } else {
            kept_clauses.push(i);
        }
    }

    b.node("s");
    for &i in &kept_clauses {
        b.node(format!("u{}", i + 1));
    }
    for k in 1..=f.num_vars {
        b.node(var_node(k)).node(var_node_prime(k));
    }
    b.node("w");
    for j in 1..=c.ell {
        b.node(format!("w{j}"));
    }
    b.node("t");

    let mut bus: Vec<String> = vec!["s".into()];
    bus.extend(kept_clauses.iter().map(|i| format!("u{}", i + 1)));
    bus.extend((1..=c.ell).map(|j| format!("w{j}")));
    bus.push("t".into());
    for (idx, pair) in bus.windows(2).enumerate() {
        let w = if idx + 2 == bus.len() { &c.last_bus } else { &c.f };
        edge(&mut b, &pair[0], &pair[1], w, MmsEdgeRole::Bus);
    }

    for &i in &kept_clauses {
        let clause = &f.clauses[i];
        let mut seen = BTreeSet::new();
        for lit in clause {
            if !seen.insert(lit.var) {
                notes.push(format!("clause {}: repeated literal {lit} merged", i + 1));
                continue;
            }
            let u = format!("u{}", i + 1);
            if lit.positive {
                edge(&mut b, &u, &var_node(lit.var), &c.expensive, MmsEdgeRole::Expensive { clause: i + 1, var: lit.var });
            } else {
                edge(&mut b, &u, &var_node(lit.var), &c.cheap, MmsEdgeRole::Cheap { clause: i + 1, var: lit.var });
            }
        }
    }
    for k in 1..=f.num_vars {
        edge(&mut b, &var_node(k), &var_node_prime(k), &c.expensive_path, MmsEdgeRole::ExpensivePath(k));
        edge(&mut b, &var_node_prime(k), "w", &Rational::from_integer(0.into()), MmsEdgeRole::ExpensivePathEnd(k));
        edge(&mut b, &var_node(k), "w", &Rational::from_integer(0.into()), MmsEdgeRole::CheapPath(k));
    }
    edge(&mut b, "w", "t", &c.hub, MmsEdgeRole::Hub);
    b.start("s").target("t").goal_reward(Some(c.r.clone()));
    let graph = b.build().map_err(|e| BadParameter(e.to_string()))?;

    let clause_nodes =
        (0..f.clauses.len()).map(|i| graph.node(&format!("u{}", i + 1))).collect();
    let gadget = MmsGadget { graph, beta: beta.clone(), formula: f.clone(), constants: c, edge_roles: roles, clause_nodes, notes };
    gadget.check_invariants().map_err(BadParameter)?;
    Ok(gadget)
}

impl MmsGadget {
    pub fn agent(&self) -> AgentConfig {
        AgentConfig::new(self.beta.clone()).expect("beta checked").with_goal_reward(self.constants.r.clone())
    }

    pub fn bus_edges(&self) -> Vec<EdgeId> {
        (0..self.edge_roles.len()).filter(|&e| self.edge_roles[e] == MmsEdgeRole::Bus).collect()
    }

    /// Search options with the bus forced into every candidate subgraph
    /// (any motivating subgraph of the gadget contains the bus).
    pub fn search_options(&self, budget: u64) -> SearchOptions {
        SearchOptions::default().with_budget(budget).with_order(SearchOrder::Any).with_forced(self.bus_edges())
    }

    fn check_invariants(&self) -> Result<(), String> {
        let c = &self.constants;
        let zero = Rational::from_integer(0.into());
        if !(c.last_bus > zero && c.last_bus <= c.f) {
            return Err(format!("last bus edge {} outside (0, f]", Frac(&c.last_bus)));
        }
        let bus_total: Rational = self.bus_edges().iter().map(|&e| self.graph.edge(e).cost.clone()).sum();
        let clauses = self.clause_nodes.iter().flatten().count();
        let expected = &c.f * int((clauses + c.ell) as i64) + &c.last_bus;
        if bus_total != expected {
            return Err("bus weights do not add up".into());
        }
        if &c.expensive_path + &zero + &c.cheap != c.expensive {
            return Err("literal routes to w do not both cost 2".into());
        }
        Ok(())
    }

    fn id(&self, name: &str) -> NodeId {
        self.graph.node(name).expect("gadget node")
    }

    fn edge_between(&self, u: &str, v: &str) -> Option<EdgeId> {
        self.graph.find_edge(self.id(u), self.id(v))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            writeln!(out, "# note: {n}").unwrap();
        }
        for line in self.constants.render().lines() {
            writeln!(out, "# {line}").unwrap();
        }
        out.push_str(&crate::text::render_annotated(&self.graph, |_| None, |e| Some(self.edge_roles[e].label())));
        out
    }
}

/// Subgraph of a satisfying assignment: the bus, `w -> t`, per variable the
/// cheap path if true and the expensive path otherwise, and per clause the
/// edge of its first true literal; nodes left without in-edges are removed.
pub fn assignment_to_mms(g: &MmsGadget, asg: &[bool]) -> Result<Subgraph, MmsError> {
    if !g.formula.satisfied_by(asg) {
        return Err(MmsError::AssignmentNotSatisfying);
    }
    let mut keep: BTreeSet<EdgeId> = g.bus_edges().into_iter().collect();
    keep.insert(g.edge_between("w", "t").expect("hub edge"));
    for (i, clause) in g.formula.clauses.iter().enumerate() {
        if g.clause_nodes[i].is_none() {
            continue;
        }
        let lit = clause.iter().find(|l| l.holds(asg)).expect("satisfied");
        keep.insert(g.edge_between(&format!("u{}", i + 1), &var_node(lit.var)).expect("clause edge"));
    }
    for k in 1..=g.formula.num_vars {
        if asg[k - 1] {
            keep.insert(g.edge_between(&var_node(k), "w").unwrap());
        } else {
            keep.insert(g.edge_between(&var_node(k), &var_node_prime(k)).unwrap());
            keep.insert(g.edge_between(&var_node_prime(k), "w").unwrap());
        }
    }
    // Drop nodes without in-edges (other than s), repeatedly.
    loop {
        let mut has_in = vec![false; g.graph.node_count()];
        for &e in &keep {
            has_in[g.graph.edge(e).to] = true;
        }
        let before = keep.len();
        keep.retain(|&e| {
            let from = g.graph.edge(e).from;
            from == g.graph.start() || has_in[from]
        });
        if keep.len() == before {
            break;
        }
    }
    Ok(Subgraph::from_edges(&g.graph, keep))
}

/// Reads an assignment off a minimal motivating subgraph: `x_k = 0` iff the
/// expensive path of `v_k` survives.
pub fn mms_to_assignment(g: &MmsGadget, sub: &Subgraph) -> Result<Assignment, MmsError> {
    let motivating = is_motivating(&g.graph, sub, &g.agent()).expect("gadget carries its reward");
    if !motivating {
        return Err(MmsError::NotMinimalMotivating("agent does not reach t".into()));
    }
    let asg: Assignment = (1..=g.formula.num_vars)
        .map(|k| {
            let a = g.edge_between(&var_node(k), &var_node_prime(k)).unwrap();
            let b = g.edge_between(&var_node_prime(k), "w").unwrap();
            !(sub.kept_edges.contains(&a) && sub.kept_edges.contains(&b))
        })
        .collect();
    if !g.formula.satisfied_by(&asg) {
        return Err(MmsError::NotMinimalMotivating("extracted assignment does not satisfy the formula".into()));
    }
    Ok(asg)
}

/// Structural facts every minimal motivating subgraph of the gadget has:
/// the whole bus; exactly one off-bus edge per clause node; a unique route
/// from each kept `v_k` to `w`; and clause edge plus route never both
/// cheap or both expensive.
pub fn audit_structure(g: &MmsGadget, sub: &Subgraph) -> Result<(), String> {
    let kept = |e: EdgeId| sub.kept_edges.contains(&e);
    if let Some(&e) = g.bus_edges().iter().find(|&&e| !kept(e)) {
        let edge = g.graph.edge(e);
        return Err(format!("bus edge {} -> {} missing", g.graph.id(edge.from), g.graph.id(edge.to)));
    }
    let routes = |k: usize| -> (bool, bool) {
        let cheap = kept(g.edge_between(&var_node(k), "w").unwrap());
        let exp = kept(g.edge_between(&var_node(k), &var_node_prime(k)).unwrap())
            && kept(g.edge_between(&var_node_prime(k), "w").unwrap());
        (cheap, exp)
    };
    for k in 1..=g.formula.num_vars {
        if sub.kept_nodes.contains(&g.id(&var_node(k))) {
            let (cheap, exp) = routes(k);
            if cheap == exp {
                return Err(format!("v{k} does not have exactly one route to w"));
            }
        }
    }
    for (i, node) in g.clause_nodes.iter().enumerate() {
        let Some(u) = *node else { continue };
        let off_bus: Vec<EdgeId> = sub
            .kept_edges
            .iter()
            .copied()
            .filter(|&e| g.graph.edge(e).from == u && g.edge_roles[e] != MmsEdgeRole::Bus)
            .collect();
        let [e] = off_bus[..] else {
            return Err(format!("u{} keeps {} off-bus edges", i + 1, off_bus.len()));
        };
        let (expensive_edge, k) = match g.edge_roles[e] {
            MmsEdgeRole::Expensive { var, .. } => (true, var),
            MmsEdgeRole::Cheap { var, .. } => (false, var),
            _ => unreachable!("clause nodes only have clause edges off the bus"),
        };
        let (cheap_route, _) = routes(k);
        if expensive_edge != cheap_route {
            return Err(format!("u{}: clause edge and route of v{k} have the same type", i + 1));
        }
    }
    Ok(())
}
