use thiserror::Error;

/// Errors produced by the expansion library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KlError {
    /// A parameter or argument violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two inputs that must agree in length or shape do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A mode whose eigenvalue is numerically zero was used where division by
    /// its eigenvalue is required.
    #[error("mode {mode} has numerically zero eigenvalue {eigenvalue:e}")]
    ZeroMode { mode: usize, eigenvalue: f64 },

    /// An iterative solver did not converge or a root could not be bracketed.
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

impl KlError {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, KlError::NumericFailure(_))
    }
}

pub type Result<T> = std::result::Result<T, KlError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(KlError::DimensionMismatch { expected, found })
    }
}
