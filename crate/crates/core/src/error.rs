//! Error types shared across the crate.

use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation's precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Evaluation point lies too close to a pole of the resolvent.
    #[error("s = {s} is within {distance:.3e} of the pole {pole} (tolerance {tol:.3e})")]
    PoleProximity {
        s: Complex64,
        pole: Complex64,
        distance: f64,
        tol: f64,
    },

    /// Argument outside the range a routine can evaluate accurately.
    #[error("out of range: {0}")]
    Range(String),

    /// The integrated state became non-finite.
    #[error("divergent state at t = {t}")]
    Divergence { t: f64 },

    /// Requested integration step exceeds the stability bound.
    #[error("dt = {dt:.3e} exceeds the stability bound dt_max = {dt_max:.3e}")]
    Stability { dt: f64, dt_max: f64 },

    /// Malformed input file or configuration.
    #[error("input error: {0}")]
    Input(String),
}
