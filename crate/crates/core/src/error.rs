//! Crate-wide error type.

/// Errors raised by geometric and numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point that must lie strictly inside the unit disc does not.
    #[error("point ({0}, {1}) is not strictly inside the unit disc")]
    OutsideDisc(f64, f64),

    /// A point lies outside the domain an operation requires.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// A query sits within the rejection tolerance of a domain boundary.
    #[error("query within {tol:e} of a domain boundary ({what})")]
    BoundaryProximity { what: String, tol: f64 },

    /// Invalid construction or call parameters.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A numerical procedure failed (overflow, non-convergence, branch loss).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Not enough data to produce the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The computation ran but could not certify a verdict.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// A constructed object failed its own validation.
    #[error("construction failed: {0}")]
    Construction(String),

    /// The numeric map fitter did not reach its accuracy target.
    #[error("conformal fit failed: {reason} (residual {residual:e})")]
    Fit { reason: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
