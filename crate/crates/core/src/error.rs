//! Error type shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad field: {0}")]
    BadField(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("enumeration budget exceeded: group of order {order} over budget {budget}")]
    BudgetExceeded { order: u64, budget: u64 },

    #[error("character table budget exceeded: {0}")]
    DixonBudget(String),

    #[error("mismatched groups: {0}")]
    GroupMismatch(String),

    #[error("class fusion failed: {0}")]
    FusionFailed(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("assertion failed: {0}")]
    AssertionFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
