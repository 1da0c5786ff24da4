//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the cascade library.
///
/// Scalar payloads are stored as `f64` regardless of the working scalar type
/// so the error enum itself stays non-generic.
#[derive(Debug, Error)]
pub enum HiltError {
    /// A constructor or operation precondition was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation point lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The hazard rate is singular (F(x) = 1) at the requested point.
    #[error("hazard singularity at x = {x}: F(x) = 1; clamp via hazard_regularized")]
    HazardSingularity { x: f64 },

    /// The requested target fraction can never be reached.
    #[error("target fraction {alpha} is unreachable (limit {limit})")]
    UnreachableTarget { alpha: f64, limit: f64 },

    /// A solve has no admissible solution for the given query.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Fixed-point iteration ran out of iterations.
    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    NonConvergence { last: f64, iterations: usize },

    /// The integrator state left the unit simplex beyond tolerance.
    #[error("step failure at t = {t}: (b = {b}, d = {d}) left the simplex; reduce the step size")]
    StepFailure { t: f64, b: f64, d: f64 },

    /// A trajectory is too short for the requested analysis.
    #[error("trajectory too short: need at least {need} samples, got {got}")]
    TrajectoryTooShort { need: usize, got: usize },
}

impl HiltError {
    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            HiltError::NonConvergence { .. } | HiltError::StepFailure { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, HiltError>;
