use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke a precondition, such as non-conforming shapes.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("split error: {0}")]
    Split(String),

    #[error("resample error: {0}")]
    Resample(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    /// A metric whose denominator is empty, such as the true positive rate of
    /// an evaluation set without positives.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
