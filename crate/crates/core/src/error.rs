//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Pressure (or a quantity derived from it) evaluated at or below the
    /// congestion threshold v = 1. Carries the offending value; values are
    /// never clamped back into the domain.
    #[error("congestion boundary reached: {what} evaluated at v = {v} <= 1")]
    CongestionDomain { what: &'static str, v: f64 },

    /// A precondition on arguments was violated.
    #[error("usage error: {0}")]
    Usage(String),

    /// Invalid model parameters.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// Adaptive step size underflowed; carries the last abscissa reached.
    #[error("step size underflow at {at} (stiffness not resolved, step = {step:e})")]
    StepUnderflow { at: f64, step: f64 },

    /// A root or crossing was not bracketed by the tabulated domain.
    #[error("domain too small: {0}; extend the integration domain")]
    ExtendDomain(String),

    /// Profile tails are not resolved on the requested domain.
    #[error("domain too narrow: {0}")]
    DomainTooNarrow(String),

    /// Integrated perturbation variables require zero-mass data.
    #[error("perturbation mass defect {defect:e} exceeds tolerance {tol:e}; \
             integrated variables are meaningful only for zero-mass data")]
    NonZeroMass { defect: f64, tol: f64 },

    /// The simulation reached v <= 1.
    #[error("congestion violated at t = {t}: min(v) = {min_v} <= 1 \
             (reduce dt or the perturbation amplitude)")]
    CongestionViolation { t: f64, min_v: f64 },

    /// Generic numerical failure (singular solve, non-finite value).
    #[error("numerical failure: {0}")]
    Numerical(String),
}
