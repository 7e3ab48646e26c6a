use tiplan::agent::{cost_ratio, AgentConfig, TieBreak};
use tiplan::generators::{random_dag, CostRange};
use tiplan::rational::{int, ratio};
use tiplan::shortcut::{analyze, certified_lower_bound, check_identities, ratio_bound, witness_from_certificate};

#[test]
fn random_certificates_hold() {
    let betas = [ratio(1, 3), ratio(1, 2), ratio(3, 4)];
    let mut witnesses = 0;
    let mut failures = Vec::new();
    for seed in 0..1500u64 {
        let n = 3 + (seed % 8) as usize;
        let g = random_dag(n, &ratio(1, 2), CostRange::default(), seed);
        let beta = betas[(seed % 3) as usize].clone();
        for tie in [TieBreak::Lexicographic, TieBreak::Procrastinate] {
            let cfg = AgentConfig::new(beta.clone()).unwrap().with_tie_break(tie);
            let cert = analyze(&g, &cfg).unwrap();
            let d = g.dist(g.start(), g.target()).unwrap();
            assert!(d >= certified_lower_bound(&cert), "seed {seed}");
            if d > int(0) {
                assert!(cost_ratio(&g, &cfg).unwrap() <= ratio_bound(&cert), "seed {seed}");
            }
            check_identities(&cert).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            for (i, s) in cert.s_sets.iter().enumerate() {
                for k in 2..=s.len() + 1 {
                    match witness_from_certificate(&g, &cert, i + 1, k) {
                        Ok(_) => witnesses += 1,
                        Err(e) => failures.push((seed, i + 1, k, e.to_string())),
                    }
                }
            }
        }
    }
    eprintln!("witnesses built: {witnesses}, failures: {}", failures.len());
    assert!(failures.is_empty(), "{:?}", &failures[..failures.len().min(5)]);
}
