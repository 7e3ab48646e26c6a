#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiplan::agent::AgentConfig;
use tiplan::generators::{random_dag, CostRange};
use tiplan::motivating::{find_motivating_subgraph, is_motivating, SearchOptions};
use tiplan::rational::{int, parse, ratio, Rational};
use tiplan::reductions::{Formula3Cnf, Literal};
use tiplan::{Subgraph, TaskGraph};

/// Builds a graph from `"u v cost"` triples; `s` and `t` are start and target.
pub fn graph(name: &str, spec: &str) -> TaskGraph {
    let mut b = TaskGraph::builder(name);
    let mut seen = BTreeSet::new();
    for item in spec.split(',') {
        let parts: Vec<&str> = item.split_whitespace().collect();
        let [u, v, c] = parts[..] else { panic!("bad edge `{item}`") };
        for x in [u, v] {
            if seen.insert(x.to_string()) {
                b.node(x);
            }
        }
        b.edge(u, v, parse(c).unwrap());
    }
    b.start("s").target("t").build().unwrap()
}

/// Hand-built MTR instances, all with at most eight nodes. Parallel edges
/// are written with a zero-cost subdivision node.
pub fn mtr_corpus() -> Vec<TaskGraph> {
    let specs = [
        ("single-1", "s t 1"),
        ("single-3/4", "s t 3/4"),
        ("single-1/2", "s t 1/2"),
        ("single-0", "s t 0"),
        ("parallel-1-2", "s t 1, s p 2, p t 0"),
        ("parallel-1/2-1/4", "s t 1/2, s p 1/4, p t 0"),
        ("chain-2", "s a 1/4, a t 1/4"),
        ("chain-3", "s a 1/4, a b 1/4, b t 1/4"),
        ("chain-front-loaded", "s a 1/2, a t 0"),
        ("chain-back-loaded", "s a 0, a t 1/2"),
        ("diamond", "s a 1/4, s b 1/2, a t 1/2, b t 1/4"),
        ("diamond-skew", "s a 0, s b 1/4, a t 3/4, b t 1/4"),
        ("shortcut", "s a 0, a t 1/2, s t 1/4"),
        ("akerlof-3", "s a 0, s t 1/4, a t 1/2"),
        ("akerlof-4", "s a 0, a b 0, s t 1/8, a t 1/4, b t 1/2"),
        ("dead-end", "s d 0, d x 1, x t 1, s t 1/2"),
        ("lure", "s a 1/4, a t 0, a x 1, x t 0"),
        ("fork-late", "s a 1/4, a b 0, a c 1/4, b t 1/2, c t 0"),
        ("ladder", "s a 0, s b 1/4, a b 0, a c 1/4, b c 0, c t 1/4"),
        ("two-routes", "s a 1/4, a t 1/4, s b 0, b c 0, c t 3/4"),
        ("zigzag", "s a 1/4, a b 0, b t 1/4, s b 1/2, a t 1/2"),
        ("long-cheap", "s a 0, a b 0, b c 0, c t 1/4, s t 1/2"),
        ("wide", "s a 1/4, s b 1/4, s c 1/4, a t 1/4, b t 0, c t 1/2"),
        ("bottleneck", "s a 0, s b 1/4, a m 1/4, b m 0, m t 1/4"),
        ("tempting-zero", "s z 0, z t 1, s a 1/4, a t 1/4"),
        ("nested", "s a 0, a b 0, b t 1/2, a t 1/4, s t 1/2"),
        ("triangle-chain", "s a 1/4, a b 1/4, s b 1/4, b t 1/4"),
        ("costly-start", "s a 3/4, a t 0, s b 1, b t 0"),
        ("seven-nodes", "s a 0, a b 1/4, b c 0, c d 1/4, d e 0, e t 1/4, a e 1/2"),
        ("eight-nodes", "s a 1/4, a b 0, b c 0, c t 1/4, s d 0, d e 0, e f 0, f t 1/2"),
        ("mixed-fork", "s a 0, a t 1/2, a b 1/4, b t 0, s b 1/2"),
        ("double-diamond", "s a 1/4, s b 0, a m 0, b m 1/4, m c 1/4, m d 0, c t 0, d t 1/4"),
    ];
    specs.iter().map(|(name, spec)| graph(name, spec)).collect()
}

/// Random graphs with at most 25 edges that have a motivating subgraph.
pub fn motivatable(count: usize) -> Vec<(TaskGraph, AgentConfig, bool)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let n = 4 + (seed % 6) as usize;
        let g = random_dag(n, &ratio(1, 2), CostRange::default(), seed);
        let g = if seed % 2 == 0 { with_chain(&g, 2 + (seed / 2 % 2) as usize) } else { g };
        if g.edges().len() > 25 {
            continue;
        }
        let beta = [ratio(1, 2), ratio(2, 3), ratio(3, 4)][(seed % 3) as usize].clone();
        let d = g.dist(g.start(), g.target()).unwrap();
        let cfg = AgentConfig::new(beta.clone()).unwrap();
        // Smallest reward on a grid over [0, 2d/beta] that still admits a
        // motivating subgraph, so most instances sit near the threshold.
        let top = &d * int(2) / &beta;
        for k in 0..=32i64 {
            let r = &top * Rational::new(k.into(), 32.into());
            let g = g.with_goal_reward(Some(r));
            let res = find_motivating_subgraph(&g, &cfg, &SearchOptions::default()).unwrap();
            if res.found().is_some() {
                let full = is_motivating(&g, &Subgraph::full(&g), &cfg).unwrap();
                out.push((g, cfg, full));
                break;
            }
        }
    }
    out
}

/// Adds a chain `s -> p1 -> ... -> pk` of free edges, each `p_i -> t`
/// costing `2^i` quarters, which tempts the agent to put the work off.
pub fn with_chain(g: &TaskGraph, k: usize) -> TaskGraph {
    let mut b = TaskGraph::builder(format!("{}-chain{k}", g.name()));
    for v in g.nodes() {
        b.node(v.clone());
    }
    for e in g.edges() {
        b.edge(g.id(e.from), g.id(e.to), e.cost.clone());
    }
    for i in 1..=k {
        let p = format!("p{i}");
        b.node(p.clone());
        b.edge(if i == 1 { "s".to_string() } else { format!("p{}", i - 1) }, p.clone(), int(0));
        b.edge(p, "t", Rational::new((1i64 << i).into(), 4.into()));
    }
    b.start("s").target("t");
    b.build().unwrap()
}

/// Sorted literal triples over `n` variables, repeats allowed.
pub fn clauses(n: usize) -> Vec<[Literal; 3]> {
    let lits: Vec<Literal> = (1..=n).flat_map(|v| [Literal::pos(v), Literal::neg(v)]).collect();
    let mut out = Vec::new();
    for a in 0..lits.len() {
        for b in a..lits.len() {
            for c in b..lits.len() {
                out.push([lits[a], lits[b], lits[c]]);
            }
        }
    }
    out
}

/// Every formula with one or two clauses over `n` variables.
pub fn small_family(n: usize) -> Vec<Formula3Cnf> {
    let cs = clauses(n);
    let mut out = Vec::new();
    for i in 0..cs.len() {
        out.push(Formula3Cnf::new(n, vec![cs[i]]).unwrap());
        for j in i..cs.len() {
            out.push(Formula3Cnf::new(n, vec![cs[i], cs[j]]).unwrap());
        }
    }
    out
}

pub fn random_formula(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Formula3Cnf {
    let clauses = (0..m)
        .map(|_| {
            std::array::from_fn(|_| {
                let v = rng.gen_range(1..=n);
                if rng.gen_bool(0.5) { Literal::pos(v) } else { Literal::neg(v) }
            })
        })
        .collect();
    Formula3Cnf::new(n, clauses).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
