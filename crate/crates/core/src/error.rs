use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("stratification error: class {class} has {count} member(s), need at least {needed}")]
    Stratification { class: String, count: usize, needed: usize },
    #[error("scr_amplitude {0} is below the 0.1 uS detection threshold")]
    BelowDetection(f64),
    #[error("schema error: missing column `{0}`")]
    Schema(String),
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("amp_class mismatch at row(s) {0:?}")]
    ClassMismatch(Vec<usize>),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// runtime failure. The CLI maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Degenerate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
