//! Line-oriented text formats for graphs and reward configurations.
//!
//! ```text
//! graph <name>
//! node <id>
//! edge <from> <to> <num>/<den>
//! start <id>
//! target <id>
//! goalreward <num>/<den>     # optional
//! ```
//!
//! `#` starts a comment anywhere on a line. Reward files hold
//! `reward <node> <num>/<den>` lines.

use std::fmt::Write;

use thiserror::Error;

use crate::agent::RewardConfig;
use crate::graph::{EdgeId, GraphError, NodeId, TaskGraph};
use crate::rational::{self, Frac};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn syntax(line: usize, message: impl Into<String>) -> TextError {
    TextError::Syntax { line, message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head).trim()
}

pub fn parse_graph(text: &str) -> Result<TaskGraph, TextError> {
    let mut b = TaskGraph::builder("");
    let mut named = false;
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let args: Vec<&str> = rest.split_whitespace().collect();
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(lineno, format!("`{keyword}` takes {n} argument(s)")))
            }
        };
        let number = |s: &str| rational::parse(s).map_err(|e| syntax(lineno, e.to_string()));
        match keyword {
            "graph" => {
                if named {
                    return Err(syntax(lineno, "duplicate `graph` line"));
                }
                named = true;
                b.set_name(rest.trim());
            }
            "node" => {
                arity(1)?;
                b.node(args[0]);
            }
            "edge" => {
                arity(3)?;
                b.edge(args[0], args[1], number(args[2])?);
            }
            "start" => {
                arity(1)?;
                b.start(args[0]);
            }
            "target" => {
                arity(1)?;
                b.target(args[0]);
            }
            "goalreward" => {
                arity(1)?;
                b.goal_reward(Some(number(args[0])?));
            }
            other => return Err(syntax(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    Ok(b.build()?)
}

pub fn render_graph(g: &TaskGraph) -> String {
    render_annotated(g, |_| None, |_| None)
}

/// Renders `g`, emitting `# <note>` comment lines before annotated nodes and
/// edges.
pub fn render_annotated(
    g: &TaskGraph,
    node_note: impl Fn(NodeId) -> Option<String>,
    edge_note: impl Fn(EdgeId) -> Option<String>,
) -> String {
    let mut out = String::new();
    writeln!(out, "graph {}", g.name()).unwrap();
    for v in 0..g.node_count() {
        if let Some(note) = node_note(v) {
            writeln!(out, "# {note}").unwrap();
        }
        writeln!(out, "node {}", g.id(v)).unwrap();
    }
    for (id, e) in g.edges().iter().enumerate() {
        if let Some(note) = edge_note(id) {
            writeln!(out, "# {note}").unwrap();
        }
        writeln!(out, "edge {} {} {}", g.id(e.from), g.id(e.to), Frac(&e.cost)).unwrap();
    }
    writeln!(out, "start {}", g.id(g.start())).unwrap();
    writeln!(out, "target {}", g.id(g.target())).unwrap();
    if let Some(r) = g.goal_reward() {
        writeln!(out, "goalreward {}", Frac(r)).unwrap();
    }
    out
}

pub fn parse_rewards(text: &str) -> Result<RewardConfig, TextError> {
    let mut rw = RewardConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["reward", node, value] => {
                let q = rational::parse(value).map_err(|e| syntax(i + 1, e.to_string()))?;
                rw.set(*node, q);
            }
            _ => return Err(syntax(i + 1, "expected `reward <node> <num>/<den>`")),
        }
    }
    Ok(rw)
}

pub fn render_rewards(rw: &RewardConfig) -> String {
    let mut out = String::new();
    for (node, value) in rw.iter() {
        writeln!(out, "reward {node} {}", Frac(value)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{akerlof, random_dag, CostRange};
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn renders_integers_with_unit_denominator() {
        let g = akerlof(2, &ratio(1, 2), &int(5)).unwrap();
        let text = render_graph(&g);
        assert!(text.contains("edge v1 t 5/1"), "{text}");
    }

    #[test]
    fn comments_and_goal_reward() {
        let text = "# header\ngraph demo\nnode s # first\nnode t\nedge s t 2/4\nstart s\ntarget t\ngoalreward 3/2\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.name(), "demo");
        assert_eq!(g.edges()[0].cost, ratio(1, 2));
        assert_eq!(g.goal_reward(), Some(&ratio(3, 2)));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_graph("graph g\nnode s\nbogus\n").unwrap_err();
        assert_eq!(err, TextError::Syntax { line: 3, message: "unknown keyword `bogus`".into() });
        assert!(matches!(parse_graph("graph g\nnode s\nedge s t 1/1\nstart s\ntarget s\n"), Err(TextError::Graph(_))));
    }

    #[test]
    fn rewards_round_trip() {
        let rw = parse_rewards("reward t 66/1\nreward v1 1/2\n").unwrap();
        assert_eq!(rw.get("t"), int(66));
        assert_eq!(parse_rewards(&render_rewards(&rw)).unwrap(), rw);
    }

    proptest! {
        #[test]
        fn graph_round_trip(n in 2usize..12, seed in 0u64..10_000, goal in proptest::option::of(0i64..20)) {
            let g = random_dag(n, &ratio(2, 5), CostRange::default(), seed)
                .with_goal_reward(goal.map(|k| ratio(k, 3)));
            let back = parse_graph(&render_graph(&g)).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
