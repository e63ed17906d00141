use thiserror::Error;

/// Errors raised by constructors and operations whose preconditions fail.
///
/// Identity checks never return these: a failed identity is reported through
/// [`crate::VerificationReport`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("arity {0} exceeds the supported maximum of 2")]
    ArityTooLarge(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension must be odd and at least 3, got {0}")]
    InvalidDimension(usize),

    #[error("zero coefficient for {0}; every spectral coefficient must be invertible")]
    ZeroCoefficient(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("cannot draw {needed} distinct nonzero parameters from a pool of {available}")]
    ParameterPoolExhausted { needed: usize, available: usize },

    #[error("missing coefficient for {0}")]
    MissingCoefficient(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("operator mismatch: {0}")]
    OperatorMismatch(String),

    #[error("conjugated matrix is not diagonal ({} off-diagonal entries)", .0.residual_support.len())]
    NotDiagonal(Box<crate::report::VerificationReport>),

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
