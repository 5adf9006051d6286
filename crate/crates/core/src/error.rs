use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operands disagree on dimensionality.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Data that violates a type invariant (non-finite entries, empty sets, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A configuration value outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The covariance matrix could not be factorized, even after nugget escalation.
    #[error(
        "covariance matrix is not positive definite (n = {n}, theta = {theta:?}, nugget = {nugget:e})"
    )]
    Conditioning { n: usize, theta: Vec<f64>, nugget: f64 },

    /// A metric that is not defined for the given data, e.g. R² of a constant target.
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
