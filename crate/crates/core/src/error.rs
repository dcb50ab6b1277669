use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UceError {
    /// Invalid primitives or configuration (CLI exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// A numerical routine failed to converge or hit an internal bound (exit code 3).
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The input is valid but outside what the routine handles.
    #[error("unsupported candidate shape: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, UceError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(UceError::Config(msg.into()))
}
