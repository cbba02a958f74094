use thiserror::Error;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("state cap exceeded: {states} distinct (node, sunk cost) states (cap {cap})")]
    StateCap { states: usize, cap: usize },

    #[error("guard exceeded: {0}")]
    Guard(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("recovered count {0} is not an integer in range")]
    NonIntegerCount(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
