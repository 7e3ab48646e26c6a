//! Present-biased planning on weighted task graphs.
//!
//! A naive agent with bias factor `beta` walks a DAG from `s` to `t`, at each
//! node choosing the out-edge minimizing `c(u, v) + beta * d(v)`. This crate
//! simulates that agent (optionally with a goal reward or per-node rewards),
//! certifies cost-ratio bounds through shortcut-node analysis, searches for
//! motivating subgraphs, computes minimum-total-reward configurations, and
//! builds the 3-CNF gadgets that make the latter two problems hard.

pub mod agent;
pub mod generators;
pub mod graph;
pub mod lp;
pub mod motivating;
pub mod rational;
pub mod reductions;
pub mod rewards;
pub mod shortcut;
pub mod text;

pub use agent::{AgentConfig, Outcome, RewardConfig, Step, TieBreak, Trajectory};
pub use graph::{Edge, GraphError, NodeId, Subgraph, TaskGraph};
pub use rational::Rational;
