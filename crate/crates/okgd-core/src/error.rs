use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the detector library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is invalid.
    #[error("invalid config: {0}")]
    Config(String),

    /// Input data is malformed or inconsistent.
    #[error("data error: {0}")]
    Data(String),

    /// An observation's dimension does not match what the context expects.
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// All pairwise distances in a sample set are zero, so no positive
    /// bandwidth exists.
    #[error("degenerate samples: median pairwise distance is zero")]
    DegenerateSamples,

    /// A node's burn-in observations are degenerate (see [`Error::DegenerateSamples`]).
    #[error("node {node}: burn-in observations are degenerate (zero median pairwise distance)")]
    DegenerateStream { node: usize },

    /// File access failed; the path is part of the message.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            got,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
