use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: u64 },

    #[error("duplicate index {index}")]
    DuplicateIndex { index: u64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u64, right: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A derived constant does not fit the integer range used to represent it.
    #[error("parameter overflow in {formula} (value {value:e})")]
    Overflow { formula: &'static str, value: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
