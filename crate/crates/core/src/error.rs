use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Data that should be consistent by construction is not.
    #[error("integrity error: {0}")]
    Integrity(String),
    /// The objective returned a non-finite value during a run.
    #[error("non-finite objective at iteration {iteration}, particle {particle}: {value}")]
    NonFinite { iteration: usize, particle: usize, value: f64 },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
