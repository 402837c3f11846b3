use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("keyphrase is empty")]
    EmptyKeyphrase,

    #[error("dataset is empty: {0}")]
    EmptyDataset(&'static str),

    #[error("invalid record at {path}:{line}: {reason}")]
    InvalidRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("schema-invalid JSON at {path}:{line}: {source}")]
    Jsonl {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid example: {0}")]
    InvalidExample(String),

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("parameter `{name}` has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error(
        "training diverged at epoch {epoch}, step {step} (non-finite loss); batch dumped to {dump}"
    )]
    Divergence {
        epoch: usize,
        step: usize,
        dump: PathBuf,
    },

    #[error("document mismatch: {0}")]
    DocumentMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyCorpus => "empty_corpus",
            Error::EmptyKeyphrase => "empty_keyphrase",
            Error::EmptyDataset(_) => "empty_dataset",
            Error::InvalidRecord { .. } => "invalid_record",
            Error::Jsonl { .. } => "invalid_jsonl",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidExample(_) => "invalid_example",
            Error::Checkpoint { .. } => "checkpoint",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::Divergence { .. } => "divergence",
            Error::DocumentMismatch(_) => "document_mismatch",
        }
    }
}
