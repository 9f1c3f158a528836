use thiserror::Error;

/// Errors raised by the moment, transport and dependence routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("hermite order {0} exceeds the supported maximum of {max}", max = crate::hermite::MAX_ORDER)]
    OrderTooLarge(usize),

    #[error("label {0} is not in the configured order set")]
    UnknownLabel(usize),

    #[error("transport did not converge (row error {row_err:.3e}, column error {col_err:.3e})")]
    NotConverged { row_err: f64, col_err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
