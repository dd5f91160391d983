use thiserror::Error;

use crate::balancing::WeightAssignment;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("numerically singular beyond the all-ones kernel: {0}")]
    Conditioning(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Guard(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Balancing hit its round cap before reaching a balanced state. The
    /// partial assignment is attached so callers can inspect how far it got.
    #[error("round cap {cap} exceeded during balancing")]
    RoundCapExceeded {
        cap: u64,
        partial: Box<WeightAssignment>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
