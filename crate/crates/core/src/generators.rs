//! Canonical instance generators.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::TaskGraph;
use crate::rational::{pow, render, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad parameter: {0}")]
pub struct BadParameter(pub String);

/// The weighted `F_{k-1}` chain on which a procrastinating agent pays
/// exactly `beta^(2-k)` times the optimum.
///
/// Nodes `v1..v{k-1}` and `t`; zero-cost edges `v_i -> v_{i+1}` and
/// `v_i -> t` with cost `base * beta^(1-i)`. At every `v_i` doing the task
/// now and deferring it by one step evaluate to the same value, so the agent
/// only walks the whole chain when ties resolve toward deferral.
pub fn akerlof(k: usize, beta: &Rational, base: &Rational) -> Result<TaskGraph, BadParameter> {
    if k < 2 {
        return Err(BadParameter(format!("k must be at least 2, got {k}")));
    }
    if !beta.is_positive() || *beta >= Rational::one() {
        return Err(BadParameter(format!("beta must lie in (0,1), got {}", render(beta))));
    }
    if !base.is_positive() {
        return Err(BadParameter("base cost must be positive".into()));
    }
    let name = |i: usize| format!("v{i}");
    let mut b = TaskGraph::builder(format!("akerlof-k{k}"));
    for i in 1..k {
        b.node(name(i));
    }
    b.node("t");
    for i in 1..k {
        if i + 1 < k {
            b.edge(name(i), name(i + 1), Rational::zero());
        }
        b.edge(name(i), "t", base * pow(beta, 1 - i as i64));
    }
    b.start(name(1)).target("t");
    Ok(b.build().expect("akerlof chain is a valid DAG"))
}

/// Edge costs are drawn uniformly from `{0, 1/den, 2/den, ..., max_numer/den}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRange {
    pub max_numer: u32,
    pub den: u32,
}

impl Default for CostRange {
    fn default() -> Self {
        CostRange { max_numer: 8, den: 4 }
    }
}

/// Random DAG on `n` nodes (`s`, `n01`, ..., `t` in topological order).
///
/// Each forward pair becomes an edge with probability `edge_prob`; a random
/// backbone `s -> ... -> t` is then added so `t` is always reachable.
pub fn random_dag(n: usize, edge_prob: &Rational, costs: CostRange, seed: u64) -> TaskGraph {
    assert!(n >= 2, "random_dag needs at least two nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |i: usize| match i {
        0 => "s".to_string(),
        i if i == n - 1 => "t".to_string(),
        i => format!("n{i:02}"),
    };
    let p = edge_prob.to_f64().unwrap_or(0.0).clamp(0.0, 1.0);
    let mut present = vec![vec![false; n]; n];
    for (i, row) in present.iter_mut().enumerate() {
        for cell in row.iter_mut().skip(i + 1) {
            *cell = rng.gen_bool(p);
        }
    }
    let mut prev = 0;
    for i in 1..n {
        if i == n - 1 || rng.gen_bool(0.5) {
            present[prev][i] = true;
            prev = i;
        }
    }
    let mut b = TaskGraph::builder(format!("random-n{n}-s{seed}"));
    for i in 0..n {
        b.node(name(i));
    }
    let den = costs.den.max(1) as i64;
    for (i, row) in present.iter().enumerate() {
        for (j, &on) in row.iter().enumerate() {
            if on {
                let k = rng.gen_range(0..=costs.max_numer) as i64;
                b.edge(name(i), name(j), Rational::new(k.into(), den.into()));
            }
        }
    }
    b.start(name(0)).target(name(n - 1));
    b.build().expect("forward edges only")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn akerlof_k2_is_a_single_edge() {
        let g = akerlof(2, &ratio(1, 2), &int(3)).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].cost, int(3));
    }

    #[test]
    fn akerlof_k3_weights() {
        let g = akerlof(3, &ratio(1, 2), &int(1)).unwrap();
        let c = |a: &str, b: &str| {
            let e = g.find_edge(g.node(a).unwrap(), g.node(b).unwrap()).unwrap();
            g.edge(e).cost.clone()
        };
        assert_eq!(c("v1", "t"), int(1));
        assert_eq!(c("v2", "t"), int(2));
        assert_eq!(c("v1", "v2"), int(0));
        let v1 = g.node("v1").unwrap();
        assert_eq!(g.dist(v1, g.target()).unwrap(), int(1));
    }

    #[test]
    fn akerlof_rejects_bad_parameters() {
        assert!(akerlof(1, &ratio(1, 2), &int(1)).is_err());
        assert!(akerlof(3, &int(1), &int(1)).is_err());
        assert!(akerlof(3, &int(0), &int(1)).is_err());
        assert!(akerlof(3, &ratio(1, 2), &int(0)).is_err());
    }

    #[test]
    fn random_two_nodes_is_one_edge() {
        let g = random_dag(2, &ratio(1, 2), CostRange::default(), 7);
        assert_eq!(g.edges().len(), 1);
        assert_eq!((g.edges()[0].from, g.edges()[0].to), (g.start(), g.target()));
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        for seed in 0..1000 {
            let a = random_dag(10, &ratio(1, 3), CostRange::default(), seed);
            assert!(a.validate().is_ok());
            assert!(a.dist_to_target()[a.start()].is_some());
            if seed < 20 {
                assert_eq!(a, random_dag(10, &ratio(1, 3), CostRange::default(), seed));
            }
        }
    }
}
