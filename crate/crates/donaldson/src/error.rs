use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// usage/parse problems exit 1, constraint violations exit 2,
/// numeric failures exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint violation: {what} (residual: {residual})")]
    ConstraintViolation { what: String, residual: String },

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("transform domain error: {0}")]
    TransformDomain(String),

    #[error("ellipticity violation: {0}")]
    EllipticityViolation(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag for the structured error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ConstraintViolation { .. } => "constraint_violation",
            Error::InternalConsistency(_) => "internal_consistency",
            Error::Unsupported(_) => "unsupported",
            Error::TransformDomain(_) => "transform_domain",
            Error::EllipticityViolation(_) => "ellipticity_violation",
            Error::NumericFailure(_) => "numeric_failure",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidParameter(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::ConstraintViolation { .. }
            | Error::InternalConsistency(_)
            | Error::Unsupported(_) => 2,
            Error::TransformDomain(_)
            | Error::EllipticityViolation(_)
            | Error::NumericFailure(_) => 3,
        }
    }
}
