use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-Gaussian-compatible averages: {0}")]
    IncompatibleAverages(String),

    #[error("missing average for {0}")]
    MissingAverage(&'static str),

    #[error("singular normal equations at lambda = 0; use a positive ridge coefficient (lambda > 0)")]
    Singular,

    #[error("gradient descent diverged at epoch {epoch} (loss {loss}); use a smaller learning_rate")]
    Diverged { epoch: usize, loss: f64 },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("unknown word: {0}")]
    UnknownWord(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
