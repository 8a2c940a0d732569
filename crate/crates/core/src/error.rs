use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at data row {row}, column `{column}`: {message}")]
    Parse {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("normal-equation matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn with_seed(self, seed: u64) -> Self {
        Error::Seed {
            seed,
            source: Box::new(self),
        }
    }

    /// Strips any seed wrapper to expose the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::Seed { source, .. } => source.root(),
            other => other,
        }
    }
}
