use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tiplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiplan")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Fresh scratch directory per test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tiplan-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn akerlof_pipeline_prints_ratio_16() {
    let dir = scratch("akerlof");
    let g = dir.join("ak.txt");
    let g = g.to_str().unwrap();
    let o = tiplan(&["gen", "akerlof", "--k", "6", "--beta", "1/2", "--out", g]);
    assert!(o.status.success());
    let o = tiplan(&["ratio", "--graph", g, "--beta", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("ratio 16/1"));
    assert!(text.contains("ratio_bound"), "{text}");
}

#[test]
fn output_is_deterministic() {
    let dir = scratch("determinism");
    let g = dir.join("r.txt");
    let g = g.to_str().unwrap();
    let a = tiplan(&["gen", "random", "--n", "8", "--seed", "42", "--edge-prob", "1/2"]);
    let b = tiplan(&["gen", "random", "--n", "8", "--seed", "42", "--edge-prob", "1/2"]);
    assert_eq!(a.stdout, b.stdout);
    fs::write(g, &a.stdout).unwrap();
    let a = tiplan(&["simulate", "--graph", g, "--beta", "1/2"]);
    let b = tiplan(&["simulate", "--graph", g, "--beta", "1/2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_bound_holds_on_random_seeds() {
    let dir = scratch("bound");
    for seed in 0..1000u64 {
        let n = (3 + seed % 8).to_string();
        let beta = ["1/3", "1/2", "3/4"][(seed % 3) as usize];
        let o = tiplan(&["gen", "random", "--n", &n, "--seed", &seed.to_string(), "--edge-prob", "1/2"]);
        let g = write(&dir, "g.txt", &stdout(&o));
        let o = tiplan(&["verify", "bound", "--graph", &g, "--beta", beta]);
        assert_eq!(o.status.code(), Some(0), "seed {seed}: {}", stdout(&o));
    }
}

#[test]
fn mms_reduction_on_the_worked_formula() {
    let dir = scratch("mms");
    let cnf = write(&dir, "f.cnf", "c worked example\np cnf 4 2\n1 -2 3 0\n2 -3 4 0\n");
    let o = tiplan(&["verify", "reduction", "--cnf", &cnf, "--beta", "9/10", "--which", "mms"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("sat SAT") && text.contains("search Found"), "{text}");

    let unsat = write(&dir, "u.cnf", "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
    let o = tiplan(&["verify", "reduction", "--cnf", &unsat, "--beta", "9/10", "--which", "mms"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("search NONE"));

    let o = tiplan(&["gen", "mms", "--cnf", &cnf, "--beta", "9/10"]);
    assert!(stdout(&o).contains("# role:"));
}

#[test]
fn mtr_reduction_reports_the_chain_relation() {
    let dir = scratch("mtr");
    let cnf = write(&dir, "f.cnf", "p cnf 4 2\n1 -2 3 0\n2 -3 4 0\n");
    let o = tiplan(&["verify", "reduction", "--cnf", &cnf, "--beta", "1/2", "--which", "mtr"]);
    let text = stdout(&o);
    assert!(text.contains("objective 71/1") && text.contains("reaches_t ok"), "{text}");
    assert!(text.contains("relation (3) 71/1 > 71/1 VIOLATED"), "{text}");
    assert!(text.contains("result FAIL (constants)"), "{text}");
    assert_eq!(o.status.code(), Some(1));

    // At beta = 2/3 with n = 7 every relation holds strictly.
    let o = tiplan(&["verify", "reduction", "--cnf", &cnf, "--beta", "2/3", "--which", "mtr"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = tiplan(&["gen", "mtr", "--cnf", &cnf, "--beta", "1/2", "--pad-n", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("# n 6"));
}

#[test]
fn rewards_and_simulate_round_trip() {
    let dir = scratch("rewards");
    let g = write(&dir, "g.txt", "graph one\nnode s\nnode t\nedge s t 1\nstart s\ntarget t\n");
    let o = tiplan(&["rewards", "--graph", &g, "--beta", "1/2", "--variant", "1"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("objective 2/1"), "{text}");
    let rw = write(&dir, "rw.txt", "reward t 2\n");
    let o = tiplan(&["simulate", "--graph", &g, "--beta", "1/2", "--rewards", &rw]);
    assert!(stdout(&o).contains("reached"), "{}", stdout(&o));
    let o = tiplan(&["rewards", "--graph", &g, "--beta", "1/2", "--variant", "2", "--bound", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NONE"));
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    assert_eq!(tiplan(&["ratio", "--beta", "1/2"]).status.code(), Some(2));
    assert_eq!(tiplan(&["gen", "akerlof", "--k", "6", "--beta", "0.5"]).status.code(), Some(2));
    assert_eq!(tiplan(&["ratio", "--graph", "/nonexistent", "--beta", "1/2"]).status.code(), Some(2));

    let g = write(&dir, "g.txt", "graph one\nnode s\nnode t\nedge s t 1\nstart s\ntarget t\n");
    let o = tiplan(&["motivate", "--graph", &g, "--beta", "1/2", "--reward", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NONE"));
    let o = tiplan(&["motivate", "--graph", &g, "--beta", "1/2", "--reward", "2", "--minimal"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = tiplan(&["gen", "akerlof", "--k", "8", "--beta", "1/2"]);
    let ak = write(&dir, "ak.txt", &stdout(&o));
    let o = tiplan(&["motivate", "--graph", &ak, "--beta", "1/2", "--reward", "1000", "--budget", "0"]);
    assert_eq!(o.status.code(), Some(3));
    let o = tiplan(&["rewards", "--graph", &ak, "--beta", "1/2", "--variant", "1", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}
