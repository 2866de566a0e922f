//! Deterministic simulator and benchmark harness for scoring the collective
//! intelligence of heterogeneous agent groups on a toroidal grid world.
//!
//! Agents chase a moving Good object and avoid a moving Evil object; a
//! group's score is its mean per-agent, per-iteration reward.

pub mod cli;
pub mod comm;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod grid;
pub mod notation;
pub mod policy;
pub mod report;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use eval::{evaluate, evaluate_with, group_score, run_episode, EpisodeConfig, Execution, GroupScore, RewardLog};
pub use grid::{Action, Environment, MovementPattern, Position};
pub use notation::GroupNotation;
pub use policy::{AgentSpec, AgentState, Comm, Kind, Policy};
