use thiserror::Error;

/// Library-wide error type.
///
/// The variants map onto the failure classes surfaced by the CLI:
/// specification/parameter/structural/domain problems are validation
/// failures, `Refusal` marks a Monte Carlo routine that declined to
/// produce an estimate (insufficient convergence, missing precondition),
/// and `Io` wraps filesystem errors.
#[derive(Debug, Error)]
pub enum Error {
    /// A model specification violates one of its invariants.
    #[error("invalid specification: {field}: {message}")]
    Spec { field: String, message: String },

    /// A run parameter is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    Parameter { name: String, message: String },

    /// Two path-valued arguments are structurally incompatible
    /// (different grids, different chain trajectories, wrong dimension).
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A pathwise transform hit a value outside its domain
    /// (a zero of a multiplicative path, a jump of size -1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A required moment does not exist for the named law.
    #[error("undefined moment for {law}: {message}")]
    UndefinedMoment { law: String, message: String },

    /// An estimator refused to answer rather than report a misleading number.
    #[error("refused: {0}")]
    Refusal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec { field: field.into(), message: message.into() }
    }

    pub fn parameter(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parameter { name: name.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
