use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("degenerate feature: {0}")]
    DegenerateFeature(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("insufficient enrollment: {0}")]
    InsufficientEnrollment(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("no evidence: {0}")]
    NoEvidence(String),

    #[error("load error at line {line}: {msg}")]
    Load { line: usize, msg: String },

    #[error("dataset error ({}): {msg}", subjects.join(", "))]
    Dataset { subjects: Vec<String>, msg: String },

    #[error("wav error in {path:?}: {msg}")]
    Wav { path: PathBuf, msg: String },

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
