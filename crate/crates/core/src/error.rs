use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("index {index} out of range for {len} qubits")]
    Index { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The concentration-avoidance bound is not imposed when the expected
    /// measurement equals the concentration value.
    #[error("bound not imposed: expected measurement {0} equals the concentration value")]
    BoundNotImposed(f64),

    #[error("ensemble spread is zero: kernel values are indistinguishable")]
    ZeroSpread,

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("unreachable target: {0}")]
    Unreachable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}
