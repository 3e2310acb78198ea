use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A search space exceeded its configured budget. Never a wrong answer.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("vector is not in the kernel of the matrix")]
    NotInKernel,

    #[error("jobs are not sorted by non-increasing weight/processing ratio")]
    Unsorted,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInstance(msg.into())
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
