use std::path::PathBuf;

/// Errors produced by the solvers, generators and file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An evaluator was called outside the domain where it is finite.
    #[error("domain error: {0}")]
    Domain(String),

    /// The linear program inside an ℓ1 step had no optimal solution.
    #[error("linear program ended with status {0:?}")]
    Lp(crate::l1_baseline::LpStatus),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
