use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("domain error: {op} undefined at {x}")]
    Domain { op: &'static str, x: f64 },

    #[error("derivative of order {requested} unavailable (model holds up to {available})")]
    DerivativeUnavailable { requested: usize, available: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("polynomial is not nonnegative on the real line: {0}")]
    NotNonnegative(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
