use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum DankError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not symmetric (max |A_ij - A_ji| = {asymmetry:.3e}, allowed {allowed:.3e})")]
    NotSymmetric { asymmetry: f64, allowed: f64 },

    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DankError>;

impl DankError {
    /// True for failures caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, DankError::NoConvergence(_))
    }
}
