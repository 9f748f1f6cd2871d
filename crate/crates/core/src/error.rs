use std::io;

use thiserror::Error;

/// Errors produced anywhere in the SST pipeline.
#[derive(Debug, Error)]
pub enum SstError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid change: {0}")]
    InvalidChange(String),

    #[error("unsupported subgraph size {size} (at most {max} nodes)")]
    UnsupportedSize { size: usize, max: usize },

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed label string: {0}")]
    Label(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SstError {
    /// Short machine-readable kind, used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            SstError::InvalidArgument(_) => "invalid-argument",
            SstError::InvalidChange(_) => "invalid-change",
            SstError::UnsupportedSize { .. } => "unsupported-size",
            SstError::InvalidContext(_) => "invalid-context",
            SstError::Parse { .. } => "parse",
            SstError::Label(_) => "label",
            SstError::Io(_) => "io",
            SstError::Json(_) => "json",
        }
    }
}

pub type Result<T, E = SstError> = std::result::Result<T, E>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> SstError {
    SstError::InvalidArgument(msg.into())
}
