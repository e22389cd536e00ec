use thiserror::Error;

/// Errors raised by the laboratory. The CLI maps each variant to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: shapes, normalization, out-of-range parameters.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A stated precondition of an operation fails.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An enumeration or exact solver would exceed its budget.
    #[error("capacity exceeded: {what} needs {needed} but budget `{knob}` allows {limit}")]
    Capacity {
        what: String,
        needed: u128,
        limit: u128,
        knob: &'static str,
    },

    /// A solver failed to converge or breached its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A supplied certificate does not satisfy its feasibility condition.
    #[error("certificate rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
