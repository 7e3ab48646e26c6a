mod common;

use common::{random_formula, seeded, small_family};
use tiplan::motivating::{check_minimality, find_minimal_motivating_subgraph, find_motivating_subgraph, is_motivating};
use tiplan::rational::{ratio, Rational};
use tiplan::reductions::mms::audit_structure;
use tiplan::reductions::{
    assignment_to_mms, build_mms_gadget, mms_to_assignment, parse_dimacs, sat_oracle, Formula3Cnf,
};

const BUDGET: u64 = 1_000_000;

fn beta() -> Rational {
    ratio(9, 10)
}

/// Decision agreement plus the forward map for one formula.
fn check_decision(f: &Formula3Cnf) {
    let g = build_mms_gadget(f, &beta()).unwrap();
    let cfg = g.agent();
    let res = find_motivating_subgraph(&g.graph, &cfg, &g.search_options(BUDGET)).unwrap();
    let sat = sat_oracle(f);
    assert_eq!(sat.is_some(), res.found().is_some(), "{f}");
    if let Some(asg) = sat {
        let sub = assignment_to_mms(&g, &asg).unwrap();
        assert!(is_motivating(&g.graph, &sub, &cfg).unwrap(), "{f}");
        audit_structure(&g, &sub).unwrap_or_else(|e| panic!("{f}: {e}"));
        let back = mms_to_assignment(&g, &sub).unwrap();
        assert!(f.satisfied_by(&back), "{f}");
    }
}

/// Minimality of the forward image and the greedy backward map.
fn check_round_trip(f: &Formula3Cnf) {
    let g = build_mms_gadget(f, &beta()).unwrap();
    let cfg = g.agent();
    let opts = g.search_options(BUDGET);
    let Some(asg) = sat_oracle(f) else {
        let res = find_minimal_motivating_subgraph(&g.graph, &cfg, &opts).unwrap();
        assert!(res.found().is_none(), "{f}");
        return;
    };
    let sub = assignment_to_mms(&g, &asg).unwrap();
    assert!(check_minimality(&g.graph, &sub, &cfg, &opts).unwrap(), "{f}: forward image not minimal");

    let res = find_minimal_motivating_subgraph(&g.graph, &cfg, &opts).unwrap();
    let min = res.found().expect("satisfiable formula has a minimal motivating subgraph");
    assert!(check_minimality(&g.graph, min, &cfg, &opts).unwrap(), "{f}");
    audit_structure(&g, min).unwrap_or_else(|e| panic!("{f}: {e}"));
    let back = mms_to_assignment(&g, min).unwrap();
    assert!(f.satisfied_by(&back), "{f}");
}

#[test]
fn exhaustive_one_and_two_clauses() {
    let mut count = 0;
    for n in 1..=2 {
        for f in small_family(n) {
            check_decision(&f);
            count += 1;
        }
    }
    assert!(count > 200);
}

#[test]
fn random_formulas() {
    let mut rng = seeded(7);
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..60 {
        let n = 2 + i % 3;
        let m = 2 + i % 3;
        let f = random_formula(&mut rng, n, m);
        match sat_oracle(&f) {
            Some(_) => sat += 1,
            None => unsat += 1,
        }
        check_decision(&f);
    }
    // Dense two-variable formulas are often unsatisfiable.
    for _ in 0..12 {
        let f = random_formula(&mut rng, 2, 5);
        match sat_oracle(&f) {
            Some(_) => sat += 1,
            None => unsat += 1,
        }
        check_decision(&f);
    }
    assert!(sat > 0 && unsat > 0);
    eprintln!("random formulas: {sat} satisfiable, {unsat} not");
}

#[test]
fn unsatisfiable_cores() {
    for text in [
        "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n",
        "p cnf 2 4\n1 2 2 0\n-1 -1 2 0\n1 -2 -2 0\n-1 -2 -2 0\n",
    ] {
        let f = parse_dimacs(text).unwrap();
        assert!(sat_oracle(&f).is_none());
        check_decision(&f);
    }
}

#[test]
fn minimal_round_trips() {
    for text in [
        "p cnf 1 1\n1 1 1 0\n",
        "p cnf 1 1\n-1 -1 -1 0\n",
        "p cnf 2 2\n1 -2 2 0\n-1 -1 -2 0\n",
        "p cnf 3 2\n1 -2 3 0\n-1 2 -3 0\n",
        "p cnf 4 2\n1 -2 3 0\n2 -3 4 0\n",
        "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n",
    ] {
        check_round_trip(&parse_dimacs(text).unwrap());
    }
}
