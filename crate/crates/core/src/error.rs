use thiserror::Error;

/// Errors raised by the library. The CLI maps them to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
    #[error("exact enumeration exceeded the budget of {budget} branches; use monte carlo mode (mc:<trials>) instead")]
    BudgetExceeded { budget: u64 },
    #[error("randomness is not enumerable: {0}")]
    NotEnumerable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
