//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! anything whose `str()` parses as `p/q` or an integer is accepted on input,
//! floats are rejected.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use tiplan::agent::{self, AgentConfig, RewardConfig, TieBreak, Trajectory};
use tiplan::generators::{self, CostRange};
use tiplan::motivating::{self, MotivatingError, SearchOptions};
use tiplan::rational::{self as q, Frac, Rational};
use tiplan::reductions::{self, mtr};
use tiplan::rewards::{self as mtr_solver, MtrInstance, SolveBudget, Variant};
use tiplan::shortcut;
use tiplan::text;
use tiplan::TaskGraph;

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let s = obj.str()?;
    q::parse(&s.to_string()).map_err(value_error)
}

fn frac<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((Frac(r).to_string(),))
}

fn config(beta: &Bound<'_, PyAny>, tie: &str) -> PyResult<AgentConfig> {
    let tie = match tie {
        "lex" => TieBreak::Lexicographic,
        "procrastinate" => TieBreak::Procrastinate,
        other => return Err(value_error(format!("unknown tie rule `{other}`"))),
    };
    Ok(AgentConfig::new(rat(beta)?).map_err(value_error)?.with_tie_break(tie))
}

fn formula(dimacs: &str) -> PyResult<reductions::Formula3Cnf> {
    reductions::parse_dimacs(dimacs).map_err(value_error)
}

/// Immutable task graph.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: TaskGraph,
}

#[pymethods]
impl PyGraph {
    /// Parses the line-oriented graph format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: text::parse_graph(text).map_err(value_error)? })
    }

    #[staticmethod]
    #[pyo3(signature = (k, beta, base = None))]
    fn akerlof(k: usize, beta: &Bound<'_, PyAny>, base: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let base = base.map(rat).transpose()?.unwrap_or_else(|| q::int(1));
        Ok(PyGraph { inner: generators::akerlof(k, &rat(beta)?, &base).map_err(value_error)? })
    }

    #[staticmethod]
    fn random(n: usize, seed: u64, edge_prob: &Bound<'_, PyAny>) -> PyResult<Self> {
        if n < 2 {
            return Err(value_error("n must be at least 2"));
        }
        Ok(PyGraph { inner: generators::random_dag(n, &rat(edge_prob)?, CostRange::default(), seed) })
    }

    fn to_text(&self) -> String {
        text::render_graph(&self.inner)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().to_vec()
    }

    /// `(from, to, cost)` triples.
    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Vec<(String, String, Bound<'py, PyAny>)>> {
        let g = &self.inner;
        g.edges().iter().map(|e| Ok((g.id(e.from).to_string(), g.id(e.to).to_string(), frac(py, &e.cost)?))).collect()
    }

    /// Cheapest cost from `u` to `v`.
    #[pyo3(signature = (u = None, v = None))]
    fn dist<'py>(&self, py: Python<'py>, u: Option<&str>, v: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let g = &self.inner;
        let u = u.map_or(Ok(g.start()), |id| g.require(id)).map_err(value_error)?;
        let v = v.map_or(Ok(g.target()), |id| g.require(id)).map_err(value_error)?;
        frac(py, &g.dist(u, v).map_err(value_error)?)
    }

    fn __repr__(&self) -> String {
        format!("Graph({:?}, nodes={}, edges={})", self.inner.name(), self.inner.node_count(), self.inner.edges().len())
    }
}

fn trajectory_dict<'py>(py: Python<'py>, g: &TaskGraph, t: &Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let nodes: Vec<&str> = t.nodes.iter().map(|&v| g.id(v)).collect();
    d.set_item("nodes", PyList::new(py, nodes)?)?;
    d.set_item("reached", t.reached())?;
    d.set_item("outcome", t.outcome_line(g))?;
    d.set_item("cost", frac(py, &t.total_cost)?)?;
    d.set_item("claimed", frac(py, &t.total_claimed_reward)?)?;
    d.set_item("report", t.render_report(g))?;
    Ok(d)
}

/// Walks the agent through `graph`. With `rewards` (a node -> value map) the
/// per-node reward model is used; with `reward` the goal-reward model.
#[pyfunction]
#[pyo3(signature = (graph, beta, tie = "procrastinate", reward = None, rewards = None))]
fn simulate<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    beta: &Bound<'py, PyAny>,
    tie: &str,
    reward: Option<&Bound<'py, PyAny>>,
    rewards: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = &graph.inner;
    let mut cfg = config(beta, tie)?;
    let traj = if let Some(map) = rewards {
        let mut rw = RewardConfig::new();
        for (k, v) in map.iter() {
            rw.set(k.str()?.to_string(), rat(&v)?);
        }
        agent::simulate_with_rewards(g, &cfg, &rw)
    } else if let Some(r) = reward {
        cfg = cfg.with_goal_reward(rat(r)?);
        agent::simulate_with_goal_reward(g, &cfg)
    } else {
        agent::simulate_plain(g, &cfg)
    }
    .map_err(value_error)?;
    trajectory_dict(py, g, &traj)
}

#[pyfunction]
#[pyo3(signature = (graph, beta, tie = "procrastinate"))]
fn cost_ratio<'py>(py: Python<'py>, graph: &PyGraph, beta: &Bound<'py, PyAny>, tie: &str) -> PyResult<Bound<'py, PyAny>> {
    frac(py, &agent::cost_ratio(&graph.inner, &config(beta, tie)?).map_err(value_error)?)
}

/// Shortcut certificate: ratio bound, lower bound on `d(s, t)`, largest
/// `|S_i|`, whether the identities check out, and the rendered table.
#[pyfunction]
#[pyo3(signature = (graph, beta, tie = "procrastinate"))]
fn certificate<'py>(py: Python<'py>, graph: &PyGraph, beta: &Bound<'py, PyAny>, tie: &str) -> PyResult<Bound<'py, PyDict>> {
    let cert = shortcut::analyze(&graph.inner, &config(beta, tie)?).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("ratio_bound", frac(py, &shortcut::ratio_bound(&cert))?)?;
    d.set_item("lower_bound", frac(py, &shortcut::certified_lower_bound(&cert))?)?;
    d.set_item("max_s", cert.max_s())?;
    d.set_item("identities_hold", shortcut::check_identities(&cert).is_ok())?;
    d.set_item("text", cert.render(&graph.inner))?;
    Ok(d)
}

/// Kept edges `(from, to)` of a motivating subgraph, or `None`.
#[pyfunction]
#[pyo3(signature = (graph, beta, reward, minimal = false, budget = 1_000_000, tie = "procrastinate"))]
fn find_motivating_subgraph(
    graph: &PyGraph,
    beta: &Bound<'_, PyAny>,
    reward: &Bound<'_, PyAny>,
    minimal: bool,
    budget: u64,
    tie: &str,
) -> PyResult<Option<Vec<(String, String)>>> {
    let g = &graph.inner;
    let cfg = config(beta, tie)?.with_goal_reward(rat(reward)?);
    let opts = SearchOptions::default().with_budget(budget);
    let res = if minimal {
        motivating::find_minimal_motivating_subgraph(g, &cfg, &opts)
    } else {
        motivating::find_motivating_subgraph(g, &cfg, &opts)
    }
    .map_err(|e| match e {
        MotivatingError::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        other => value_error(other),
    })?;
    Ok(res.found().map(|sub| {
        let mut edges: Vec<(String, String)> = sub
            .kept_edges
            .iter()
            .map(|&e| (g.id(g.edge(e).from).to_string(), g.id(g.edge(e).to).to_string()))
            .collect();
        edges.sort();
        edges
    }))
}

/// Exact minimum total reward for variant 1, 2 or 3; `None` if no
/// configuration works within `bound`.
#[pyfunction]
#[pyo3(signature = (graph, beta, variant, bound = None, budget = 200_000))]
fn min_total_reward<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    beta: &Bound<'py, PyAny>,
    variant: u8,
    bound: Option<&Bound<'py, PyAny>>,
    budget: usize,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let variant = Variant::from_number(variant).ok_or_else(|| value_error("variant must be 1, 2 or 3"))?;
    let mut inst = MtrInstance::new(graph.inner.clone(), rat(beta)?, variant);
    if let Some(b) = bound {
        inst = inst.with_bound(rat(b)?);
    }
    let sol = match mtr_solver::solve_exact(&inst, SolveBudget { max_lps: budget, ..SolveBudget::default() }) {
        Ok(sol) => sol,
        Err(mtr_solver::MtrError::NoneExists) => return Ok(None),
        Err(e @ mtr_solver::MtrError::BudgetExceeded) => return Err(PyRuntimeError::new_err(e.to_string())),
        Err(e) => return Err(value_error(e)),
    };
    let d = PyDict::new(py);
    let rewards = PyDict::new(py);
    for (node, value) in sol.rewards.iter() {
        rewards.set_item(node, frac(py, value)?)?;
    }
    d.set_item("rewards", rewards)?;
    d.set_item("objective", frac(py, &sol.objective)?)?;
    d.set_item("optimal", sol.optimal)?;
    d.set_item("trajectory", trajectory_dict(py, &graph.inner, &sol.trajectory)?)?;
    Ok(Some(d))
}

/// A satisfying assignment (index `k-1` is `x_k`) or `None`.
#[pyfunction]
fn sat(dimacs: &str) -> PyResult<Option<Vec<bool>>> {
    Ok(reductions::sat_oracle(&formula(dimacs)?))
}

/// Motivating-subgraph gadget; its goal reward is set.
#[pyfunction]
fn mms_gadget(dimacs: &str, beta: &Bound<'_, PyAny>) -> PyResult<PyGraph> {
    let g = reductions::build_mms_gadget(&formula(dimacs)?, &rat(beta)?).map_err(value_error)?;
    Ok(PyGraph { inner: g.graph })
}

/// Whether the gadget has a motivating subgraph, next to the SAT verdict.
#[pyfunction]
#[pyo3(signature = (dimacs, beta, budget = 1_000_000))]
fn verify_mms<'py>(py: Python<'py>, dimacs: &str, beta: &Bound<'py, PyAny>, budget: u64) -> PyResult<Bound<'py, PyDict>> {
    let f = formula(dimacs)?;
    let g = reductions::build_mms_gadget(&f, &rat(beta)?).map_err(value_error)?;
    let res = motivating::find_motivating_subgraph(&g.graph, &g.agent(), &g.search_options(budget))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("sat", reductions::sat_oracle(&f).is_some())?;
    d.set_item("found", res.found().is_some())?;
    d.set_item("oracle_calls", res.stats.oracle_calls)?;
    Ok(d)
}

/// Reward gadget (padded to the smallest admissible `n`), with the
/// constant relations as `(relation, k, lhs, cmp, rhs, holds)` tuples.
#[pyfunction]
#[pyo3(signature = (dimacs, beta, pad_n = None))]
fn mtr_gadget<'py>(
    py: Python<'py>,
    dimacs: &str,
    beta: &Bound<'py, PyAny>,
    pad_n: Option<usize>,
) -> PyResult<(PyGraph, Vec<(u8, Option<usize>, Bound<'py, PyAny>, String, Bound<'py, PyAny>, bool)>)> {
    let g = mtr::build_mtr_gadget_padded(&formula(dimacs)?, &rat(beta)?, pad_n).map_err(value_error)?;
    let relations = g
        .report
        .checks
        .iter()
        .map(|c| Ok((c.relation, c.k, frac(py, &c.lhs)?, c.cmp.to_string(), frac(py, &c.rhs)?, c.holds())))
        .collect::<PyResult<Vec<_>>>()?;
    Ok((PyGraph { inner: g.graph }, relations))
}

/// Forward direction on the reward gadget for a satisfiable formula.
#[pyfunction]
#[pyo3(signature = (dimacs, beta, pad_n = None))]
fn mtr_forward<'py>(
    py: Python<'py>,
    dimacs: &str,
    beta: &Bound<'py, PyAny>,
    pad_n: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = formula(dimacs)?;
    let g = mtr::build_mtr_gadget_padded(&f, &rat(beta)?, pad_n).map_err(value_error)?;
    let asg = reductions::sat_oracle(&g.formula).ok_or_else(|| value_error("formula is unsatisfiable"))?;
    let rw = mtr::assignment_to_rewards(&g, &asg).map_err(value_error)?;
    let traj = agent::simulate_with_rewards(&g.graph, &g.agent(), &rw).map_err(value_error)?;
    let checks = mtr::lead_to_checks(&g, &asg, &traj);
    let d = PyDict::new(py);
    d.set_item("assignment", asg)?;
    d.set_item("objective", frac(py, &rw.total_abs())?)?;
    d.set_item("budget", frac(py, &g.constants.budget())?)?;
    d.set_item("reached", traj.reached())?;
    d.set_item("lead_to_hold", checks.iter().all(|c| c.holds))?;
    d.set_item("constants_hold", g.report.all_hold())?;
    Ok(d)
}

#[pymodule]
fn pytiplan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(cost_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(certificate, m)?)?;
    m.add_function(wrap_pyfunction!(find_motivating_subgraph, m)?)?;
    m.add_function(wrap_pyfunction!(min_total_reward, m)?)?;
    m.add_function(wrap_pyfunction!(sat, m)?)?;
    m.add_function(wrap_pyfunction!(mms_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mms, m)?)?;
    m.add_function(wrap_pyfunction!(mtr_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(mtr_forward, m)?)?;
    Ok(())
}
