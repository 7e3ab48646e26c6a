mod common;

use std::time::Instant;

use tiplan::rational::{int, ratio, Rational};
use tiplan::TieBreak;
use tiplan::rewards::{check_feasible, decisions_match_path_sums, grid_oracle, solve_exact, MtrInstance, SolveBudget, Variant};

#[test]
fn solver_agrees_with_grid_oracle() {
    let beta = ratio(1, 2);
    let delta = ratio(1, 8);
    let started = Instant::now();
    for g in common::mtr_corpus() {
        let mut objectives = Vec::new();
        for variant in [Variant::I, Variant::II, Variant::III] {
            let t0 = Instant::now();
            let inst = MtrInstance::new(g.clone(), beta.clone(), variant);
            let sol = solve_exact(&inst, SolveBudget::default()).unwrap();
            assert!(sol.optimal);
            let order = sol.trajectory.nodes.iter().map(|&v| g.id(v).to_string()).collect();
            let replay = check_feasible(&inst.clone().with_tie_break(TieBreak::Custom(order)), &sol.rewards).unwrap();
            assert_eq!(replay.map(|r| r.objective), Some(sol.objective.clone()));
            assert!(decisions_match_path_sums(&g, &beta, &sol.rewards, &sol.trajectory));
            let cap = int(4);
            let oracle = grid_oracle(&inst, &delta, &cap).expect("grid finds a configuration");
            let slack = &delta * Rational::from_integer(g.node_count().into());
            assert!(oracle >= sol.objective && oracle <= &sol.objective + &slack,
                "{} {variant:?}: solver {} oracle {}", g.name(), sol.objective, oracle);
            eprintln!("{} {variant:?} {} {} {:?}", g.name(), sol.objective, oracle, t0.elapsed());
            objectives.push(sol.objective);
        }
        assert!(objectives[2] <= objectives[0] && objectives[0] <= objectives[1], "{}", g.name());
    }
    eprintln!("total {:?}", started.elapsed());
}
