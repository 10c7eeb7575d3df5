use thiserror::Error;

/// Errors raised by the metric, quadrature, Sobolev and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunkError {
    /// Dimension below 2.
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),

    /// Interpolation parameter outside [0, 1].
    #[error("interpolation parameter a must lie in [0, 1], got {0}")]
    Parameter(f64),

    /// The operation needs a < 1. At a = 1 the Sobolev class is not a vector
    /// space, so the energy functional and its critical points are undefined.
    #[error("operation requires a < 1: at a = 1 the Sobolev class W^{{1,2,1}} is not a vector space (u in it does not imply -u in it)")]
    FunkLimit,

    /// A point on or outside the guarded unit ball.
    #[error("point with |x| = {0} is not inside the open unit ball")]
    OutsideBall(f64),

    /// Vector length does not match the model dimension.
    #[error("expected a vector of length {expected}, got {got}")]
    Length { expected: usize, got: usize },

    /// A non-finite value where a finite one is required.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// A configuration value out of range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Nonlinearity fails the growth conditions at zero or infinity.
    #[error("nonlinearity rejected: {0}")]
    Nonlinearity(String),

    /// Weight rejected (negative, identically zero, unbounded).
    #[error("weight rejected: {0}")]
    Weight(String),

    /// Requested quantity is undefined for the given input.
    #[error("undefined: {0}")]
    Undefined(String),

    /// Iterative method failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Mountain-pass path degenerated.
    #[error("mountain pass failed: {0}")]
    PathCollapse(String),
}

pub type Result<T, E = FunkError> = std::result::Result<T, E>;

pub(crate) fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FunkError::NonFinite(format!("{what} = {value}")))
    }
}
