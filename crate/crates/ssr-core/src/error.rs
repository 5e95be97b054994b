use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Validation` means the caller handed us something outside a documented
/// precondition, `Numeric` means an iterative solver failed to reach its
/// tolerance, and `Io`/`Parse` cover dataset loading.
#[derive(Debug, Error)]
pub enum SsrError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SsrError>;

impl SsrError {
    pub fn validation(msg: impl Into<String>) -> Self {
        SsrError::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        SsrError::Numeric(msg.into())
    }
}
