use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TcpError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    Shape(usize, usize, usize, usize),
    #[error("non-finite value at {0}")]
    NonFinite(String),
    #[error("numeric failure on face {face:?}: {msg}")]
    Numeric { face: Vec<usize>, msg: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("load error: {0}")]
    Load(String),
}

pub type Result<T> = std::result::Result<T, TcpError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(TcpError::Dimension { expected, got });
    }
    Ok(())
}
