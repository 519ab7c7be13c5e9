use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for universe of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("state vector of {requested} qubits exceeds the cap of {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("no parameters meet the requested target: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
