use thiserror::Error;

/// Errors raised by the library. Every variant is a caller-side problem:
/// numerical routines never fail on valid input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate reduction: {0}")]
    DegenerateReduction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
