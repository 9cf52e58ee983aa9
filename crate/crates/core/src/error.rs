use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weight lambda_{n} is zero; the operation divides by it")]
    ZeroWeight { n: usize },

    #[error("weight sequence has {have} terms, operation needs {need}")]
    TooShort { have: usize, need: usize },

    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("entry {index} of the input vector must be strictly positive (got {value})")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("numerical cross-check failed: {0}")]
    CrossCheck(String),

    #[error("bound ordering violated: {0}")]
    Ordering(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
