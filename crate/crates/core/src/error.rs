use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A resource guard (grid size, spectrum size) would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A numerical procedure failed or produced an inconsistent value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A stated precondition of a check does not hold for the supplied data.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
