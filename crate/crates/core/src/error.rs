use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds a configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Exact integer arithmetic would overflow.
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// Two independent computations of the same quantity disagree.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
