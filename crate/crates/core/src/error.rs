//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A line in a trajectory file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The parsed data violates a dataset invariant (duplicates, non-finite
    /// coordinates, out-of-order frames).
    #[error("dataset integrity error: {0}")]
    Integrity(String),

    /// A caller-side contract was violated (missing goal, length mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The simulator produced a non-finite state.
    #[error("simulation error for agent {agent} at step {step}: {msg}")]
    Simulation { agent: i64, step: usize, msg: String },

    /// A configuration value violates its invariant.
    #[error("config error: field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    pub fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config { field, msg: msg.into() }
    }
}
