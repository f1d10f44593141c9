use thiserror::Error;

/// Errors raised by the library. Every variant maps to a stable
/// machine-readable code via [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("zero entry at index {index} inside the reference support")]
    ZeroOnSupport { index: usize },

    #[error("boundary point: entry {index} is zero, an open-simplex point is required")]
    BoundaryPoint { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("generator violation: log argument {value} is not positive")]
    GeneratorViolation { value: f64 },

    #[error("tangency violation: direction sums to {sum}, expected 0")]
    TangencyViolation { sum: f64 },

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-positive return {value} at row {row}, column {column}")]
    NonPositiveReturn { row: usize, column: usize, value: f64 },

    #[error("ragged rows: row {row} has {got} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidWeights(_) => "INVALID_WEIGHTS",
            Error::ZeroOnSupport { .. } => "ZERO_ON_SUPPORT",
            Error::BoundaryPoint { .. } => "BOUNDARY_POINT",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::DomainViolation(_) => "DOMAIN_VIOLATION",
            Error::GeneratorViolation { .. } => "GENERATOR_VIOLATION",
            Error::TangencyViolation { .. } => "TANGENCY_VIOLATION",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::QuadratureFailure(_) => "QUADRATURE_FAILURE",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::NonPositiveReturn { .. } => "NON_POSITIVE_RETURN",
            Error::RaggedRows { .. } => "RAGGED_ROWS",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Io(_) => "IO_ERROR",
        }
    }

    /// True for failures of an iterative numerical procedure, as opposed to bad input.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::QuadratureFailure(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
