use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl IppError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        IppError::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        IppError::Numerical(msg.into())
    }

    pub(crate) fn ingestion(msg: impl Into<String>) -> Self {
        IppError::Ingestion(msg.into())
    }

    pub(crate) fn metric(msg: impl Into<String>) -> Self {
        IppError::Metric(msg.into())
    }

    /// True for errors caused by invalid user input rather than runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(self, IppError::Config(_) | IppError::Ingestion(_))
    }
}

pub type Result<T, E = IppError> = std::result::Result<T, E>;
