//! Sunk-cost-biased planning on stochastic task graphs.
//!
//! Exact (rational) evaluation of optimal, naive, sophisticated and hybrid
//! agents, the extremal instance families that separate them, numeric
//! verification of the payoff bounds relating them, and the knapsack
//! counting gadget that makes sophisticated evaluation #P-hard.

pub mod agents;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod fan;
pub mod format;
pub mod generate;
pub mod graph;
pub mod hardness;
pub mod oracle;
pub mod scalar;

pub use agents::{Agent, AgentEvaluation, AgentKind, Evaluator};
pub use error::{Error, Result};
pub use graph::{CostModel, TaskGraph, TieBreak};
pub use scalar::Scalar;
