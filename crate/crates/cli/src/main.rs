//! `tiplan`: generate task graphs and gadgets, simulate present-biased
//! agents, and check bounds and reductions from the command line.
//!
//! Exit codes: 0 success, 1 property violated or nothing found, 2 usage or
//! input error, 3 budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tiplan::agent::{cost_ratio, simulate_plain, simulate_with_goal_reward, simulate_with_rewards, AgentConfig, TieBreak};
use tiplan::generators::{akerlof, random_dag, CostRange};
use tiplan::motivating::{
    check_minimality, find_minimal_motivating_subgraph, find_motivating_subgraph, is_motivating, render_subgraph,
    MotivatingError, SearchOptions,
};
use tiplan::rational::{self, int, Frac, Rational};
use tiplan::reductions::mms::audit_structure;
use tiplan::reductions::mtr::{lead_to_checks, perturbations};
use tiplan::reductions::{
    assignment_to_mms, assignment_to_rewards, build_mms_gadget, build_mtr_gadget_padded, mms_to_assignment,
    parse_dimacs, rewards_to_assignment, sat_oracle, Formula3Cnf,
};
use tiplan::rewards::{solve_exact, MtrError, MtrInstance, SolveBudget, Variant};
use tiplan::shortcut::{analyze, certified_lower_bound, check_identities, ratio_bound};
use tiplan::text::{parse_graph, parse_rewards, render_graph};
use tiplan::TaskGraph;

#[derive(Parser)]
#[command(name = "tiplan", version, about = "Present-biased planning on task graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a graph or a reduction gadget.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Walk the agent through a graph and print every decision.
    Simulate(SimulateArgs),
    /// Cost ratio of the agent's walk, with its shortcut certificate.
    Ratio(GraphArgs),
    /// Search for a motivating subgraph.
    Motivate(MotivateArgs),
    /// Minimum total reward that gets the agent to the target.
    Rewards(RewardsArgs),
    /// Check a bound or a reduction end to end.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// Procrastination chain whose ratio is beta^(2-k).
    Akerlof {
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = rat)]
        beta: Rational,
        #[arg(long, value_parser = rat, default_value = "1")]
        base: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random DAG.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = rat)]
        edge_prob: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Motivating-subgraph gadget for a DIMACS formula.
    Mms {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, value_parser = rat)]
        beta: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-total-reward gadget for a DIMACS formula.
    Mtr {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, value_parser = rat)]
        beta: Rational,
        /// Pad the formula to at least this many variables.
        #[arg(long)]
        pad_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Gadget round trip for one formula.
    Reduction {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, value_parser = rat)]
        beta: Rational,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        pad_n: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Ratio and lower-bound certificate checks for one graph.
    Bound(GraphArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Mms,
    Mtr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    Lex,
    Procrastinate,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = rat)]
    beta: Rational,
    /// How the agent breaks ties; `procrastinate` prefers deferring.
    #[arg(long, value_enum, default_value = "procrastinate")]
    tie: Tie,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    base: GraphArgs,
    /// Reward for reaching the target (overrides the graph's own).
    #[arg(long, value_parser = rat, conflicts_with = "rewards")]
    reward: Option<Rational>,
    /// Per-node rewards file.
    #[arg(long)]
    rewards: Option<PathBuf>,
}

#[derive(Args)]
struct MotivateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = rat)]
    beta: Rational,
    #[arg(long, value_parser = rat)]
    reward: Rational,
    #[arg(long, value_enum, default_value = "procrastinate")]
    tie: Tie,
    /// Shrink the result to a minimal motivating subgraph.
    #[arg(long)]
    minimal: bool,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
}

#[derive(Args)]
struct RewardsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = rat)]
    beta: Rational,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    variant: u8,
    #[arg(long, value_parser = rat)]
    bound: Option<Rational>,
    /// Maximum number of LPs solved.
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
}

enum Failure {
    Violated(String),
    Usage(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violated(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn rat(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<TaskGraph, Failure> {
    parse_graph(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_cnf(path: &Path) -> Result<Formula3Cnf, Failure> {
    parse_dimacs(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn agent(beta: &Rational, tie: Tie) -> Result<AgentConfig, Failure> {
    let tie = match tie {
        Tie::Lex => TieBreak::Lexicographic,
        Tie::Procrastinate => TieBreak::Procrastinate,
    };
    Ok(AgentConfig::new(beta.clone()).map_err(usage)?.with_tie_break(tie))
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(what: Gen) -> Outcome {
    match what {
        Gen::Akerlof { k, beta, base, out } => {
            let g = akerlof(k, &beta, &base).map_err(usage)?;
            emit(&render_graph(&g), out.as_deref())
        }
        Gen::Random { n, seed, edge_prob, out } => {
            if n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            if edge_prob < int(0) || edge_prob > int(1) {
                return Err(usage("--edge-prob must lie in [0,1]"));
            }
            let g = random_dag(n, &edge_prob, CostRange::default(), seed);
            emit(&render_graph(&g), out.as_deref())
        }
        Gen::Mms { cnf, beta, out } => {
            let g = build_mms_gadget(&load_cnf(&cnf)?, &beta).map_err(usage)?;
            emit(&g.render(), out.as_deref())
        }
        Gen::Mtr { cnf, beta, pad_n, out } => {
            let g = build_mtr_gadget_padded(&load_cnf(&cnf)?, &beta, pad_n).map_err(usage)?;
            let mut text = g.render();
            for line in g.report.render().lines() {
                writeln!(text, "# {line}").unwrap();
            }
            emit(&text, out.as_deref())
        }
    }
}

fn simulate(args: SimulateArgs) -> Outcome {
    let g = load_graph(&args.base.graph)?;
    let mut cfg = agent(&args.base.beta, args.base.tie)?;
    let traj = if let Some(path) = &args.rewards {
        let rw = parse_rewards(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        simulate_with_rewards(&g, &cfg, &rw)
    } else if args.reward.is_some() || g.goal_reward().is_some() {
        if let Some(r) = args.reward {
            cfg = cfg.with_goal_reward(r);
        }
        simulate_with_goal_reward(&g, &cfg)
    } else {
        simulate_plain(&g, &cfg)
    }
    .map_err(usage)?;
    print!("{}", traj.render_report(&g));
    Ok(())
}

fn ratio(args: GraphArgs) -> Outcome {
    let g = load_graph(&args.graph)?;
    let cfg = agent(&args.beta, args.tie)?;
    let r = cost_ratio(&g, &cfg).map_err(usage)?;
    let cert = analyze(&g, &cfg).map_err(usage)?;
    println!("ratio {}", Frac(&r));
    print!("{}", cert.render(&g));
    Ok(())
}

fn motivate(args: MotivateArgs) -> Outcome {
    let g = load_graph(&args.graph)?;
    let cfg = agent(&args.beta, args.tie)?.with_goal_reward(args.reward);
    let opts = SearchOptions::default().with_budget(args.budget);
    let res = if args.minimal {
        find_minimal_motivating_subgraph(&g, &cfg, &opts)
    } else {
        find_motivating_subgraph(&g, &cfg, &opts)
    };
    let res = res.map_err(|e| match e {
        MotivatingError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
        MotivatingError::OutDegree(_) => Failure::Violated(e.to_string()),
        other => usage(other),
    })?;
    println!("explored {} oracle_calls {}", res.stats.nodes_explored, res.stats.oracle_calls);
    match res.found() {
        Some(sub) => {
            print!("{}", render_subgraph(&g, sub));
            Ok(())
        }
        None => {
            println!("NONE");
            Err(Failure::Violated("no motivating subgraph".into()))
        }
    }
}

fn rewards(args: RewardsArgs) -> Outcome {
    let g = load_graph(&args.graph)?;
    let variant = Variant::from_number(args.variant).ok_or_else(|| usage("--variant must be 1, 2 or 3"))?;
    let mut inst = MtrInstance::new(g.clone(), args.beta.clone(), variant);
    if let Some(b) = args.bound {
        inst = inst.with_bound(b);
    }
    let budget = SolveBudget { max_lps: args.budget, ..SolveBudget::default() };
    match solve_exact(&inst, budget) {
        Ok(sol) => {
            print!("{}", sol.render(&g));
            if sol.optimal {
                Ok(())
            } else {
                Err(Failure::Budget("budget ran out before optimality was proven".into()))
            }
        }
        Err(MtrError::NoneExists) => {
            println!("NONE");
            Err(Failure::Violated(MtrError::NoneExists.to_string()))
        }
        Err(e @ MtrError::BudgetExceeded) => Err(Failure::Budget(e.to_string())),
        Err(e) => Err(usage(e)),
    }
}

/// Collects `name ok|FAIL` lines and remembers whether any failed.
#[derive(Default)]
struct Report {
    text: String,
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, s: impl AsRef<str>) {
        writeln!(self.text, "{}", s.as_ref()).unwrap();
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.line(format!("{name} {}", if ok { "ok" } else { "FAIL" }));
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn finish(self) -> Outcome {
        print!("{}", self.text);
        if self.failed.is_empty() {
            println!("result ok");
            Ok(())
        } else {
            println!("result FAIL ({})", self.failed.join(", "));
            Err(Failure::Violated(format!("failed: {}", self.failed.join(", "))))
        }
    }
}

fn verify_mms(f: &Formula3Cnf, beta: &Rational, budget: u64) -> Outcome {
    let g = build_mms_gadget(f, beta).map_err(usage)?;
    let cfg = g.agent();
    let opts = g.search_options(budget);
    let mut rep = Report::default();
    let sat = sat_oracle(f);
    let res = find_motivating_subgraph(&g.graph, &cfg, &opts).map_err(|e| match e {
        MotivatingError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
        other => usage(other),
    })?;
    rep.line(format!("formula {f}"));
    rep.line(format!("sat {}", if sat.is_some() { "SAT" } else { "UNSAT" }));
    rep.line(format!("search {}", if res.found().is_some() { "Found" } else { "NONE" }));
    rep.line(format!("explored {} oracle_calls {}", res.stats.nodes_explored, res.stats.oracle_calls));
    rep.check("equivalence", sat.is_some() == res.found().is_some());
    if let Some(asg) = sat {
        rep.line(format!("assignment {}", tiplan::reductions::cnf::render_assignment(&asg)));
        let sub = assignment_to_mms(&g, &asg).map_err(usage)?;
        rep.check("forward_motivating", is_motivating(&g.graph, &sub, &cfg).map_err(usage)?);
        rep.check("forward_minimal", check_minimality(&g.graph, &sub, &cfg, &opts).map_err(usage)?);
        rep.check("forward_structure", audit_structure(&g, &sub).is_ok());
        let back = mms_to_assignment(&g, &sub).ok();
        rep.check("round_trip", back.is_some_and(|b| f.satisfied_by(&b)));
    }
    rep.finish()
}

fn verify_mtr(f: &Formula3Cnf, beta: &Rational, pad_n: Option<usize>) -> Outcome {
    let g = build_mtr_gadget_padded(f, beta, pad_n).map_err(usage)?;
    let mut rep = Report::default();
    rep.line(format!("formula {f}"));
    for line in g.constants.render().lines() {
        rep.line(line);
    }
    for line in g.report.render().lines() {
        rep.line(format!("relation {line}"));
    }
    rep.check("constants", g.report.all_hold());
    let Some(asg) = sat_oracle(&g.formula) else {
        rep.line("sat UNSAT");
        rep.line("forward direction not applicable");
        return rep.finish();
    };
    rep.line("sat SAT");
    rep.line(format!("assignment {}", tiplan::reductions::cnf::render_assignment(&asg)));
    let rw = assignment_to_rewards(&g, &asg).map_err(usage)?;
    rep.line(format!("objective {}", Frac(&rw.total_abs())));
    rep.check("objective_is_budget", rw.total_abs() == g.constants.budget());
    let traj = simulate_with_rewards(&g.graph, &g.agent(), &rw).map_err(usage)?;
    rep.line(traj.outcome_line(&g.graph));
    rep.check("reaches_t", traj.reached());
    let checks = lead_to_checks(&g, &asg, &traj);
    for statement in 1..=8u8 {
        let mine: Vec<_> = checks.iter().filter(|c| c.statement == statement).collect();
        if mine.is_empty() {
            rep.line(format!("lead_to {statement} not applicable"));
            continue;
        }
        let held = mine.iter().filter(|c| c.holds).count();
        let margin = mine.iter().filter_map(|c| c.margin.clone()).min();
        let margin = margin.map_or("-".to_string(), |m| Frac(&m).to_string());
        rep.line(format!("lead_to {statement} {held}/{} min_margin {margin}", mine.len()));
        rep.check(&format!("lead_to_{statement}"), held == mine.len());
    }
    rep.check("round_trip", rewards_to_assignment(&g, &rw).is_ok());
    for p in perturbations(&g, &asg).map_err(usage)? {
        let reached = simulate_with_rewards(&g.graph, &g.agent(), &p.rewards).map_err(usage)?.reached();
        let name = format!("perturb[{}] reaches={reached}", p.label);
        rep.check(&name, reached == p.should_reach);
    }
    rep.finish()
}

fn verify_bound(args: GraphArgs) -> Outcome {
    let g = load_graph(&args.graph)?;
    let cfg = agent(&args.beta, args.tie)?;
    let cert = analyze(&g, &cfg).map_err(usage)?;
    let d = g.dist(g.start(), g.target()).map_err(usage)?;
    let mut rep = Report::default();
    let lower = certified_lower_bound(&cert);
    rep.line(format!("dist {}", Frac(&d)));
    rep.line(format!("lower_bound {}", Frac(&lower)));
    rep.check("dist_at_least_bound", d >= lower);
    let bound = ratio_bound(&cert);
    if d > int(0) {
        let r = cost_ratio(&g, &cfg).map_err(usage)?;
        rep.line(format!("ratio {}", Frac(&r)));
        rep.line(format!("ratio_bound {}", Frac(&bound)));
        rep.check("ratio_within_bound", r <= bound);
    } else {
        rep.line("ratio undefined (d(s,t) = 0)");
    }
    let identities = check_identities(&cert);
    if let Err(e) = &identities {
        rep.line(format!("identity violation: {e}"));
    }
    rep.check("identities", identities.is_ok());
    rep.finish()
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen { what } => gen(what),
        Command::Simulate(a) => simulate(a),
        Command::Ratio(a) => ratio(a),
        Command::Motivate(a) => motivate(a),
        Command::Rewards(a) => rewards(a),
        Command::Verify { what: Verify::Reduction { cnf, beta, which, pad_n, budget } } => {
            let f = load_cnf(&cnf)?;
            match which {
                Which::Mms => verify_mms(&f, &beta, budget),
                Which::Mtr => verify_mtr(&f, &beta, pad_n),
            }
        }
        Command::Verify { what: Verify::Bound(a) } => verify_bound(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Violated(m) | Failure::Usage(m) | Failure::Budget(m) => eprintln!("tiplan: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
