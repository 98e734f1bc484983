use std::io;
use std::path::Path;

/// Failures of the file-based layer, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad flags, unreadable inputs, schema mismatches.
    #[error("{0}")]
    Arg(String),
    /// Data that should be consistent is not (corrupt checkpoint, missing runs).
    #[error("{0}")]
    Integrity(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] psox_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::Arg(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { context: path.display().to_string(), source }
    }

    /// 2 for integrity failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Integrity(_) | Error::Core(psox_core::Error::Integrity(_)) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Arg(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Arg(format!("json: {e}"))
    }
}
