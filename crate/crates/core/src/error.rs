use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {dims:?}: {reason}")]
    InvalidDimension { dims: Vec<i64>, reason: &'static str },

    #[error("rank mismatch: signal has {signal} axes, kernel has {kernel}")]
    Rank { signal: usize, kernel: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("unknown kernel {0:?} (expected roberts, prewitt2, prewitt3 or sobel)")]
    UnknownKernel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(offset: u64, reason: impl Into<String>) -> Self {
        Error::Format { offset, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
