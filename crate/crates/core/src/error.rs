use thiserror::Error;

/// Errors produced by model construction and the numerical operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature failed to converge: {reason} (intervals={intervals}, evaluations={evaluations})"
    )]
    QuadratureFailure {
        reason: String,
        intervals: usize,
        evaluations: usize,
    },

    /// Root bracketing or refinement failed.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// A spectrum violates nonnegativity beyond the grid tolerance.
    #[error("Bochner positivity violated: min {min:.3e} at omega {at_omega:.6e} (tolerance {tolerance:.3e})")]
    BochnerViolation {
        min: f64,
        at_omega: f64,
        tolerance: f64,
    },

    /// A Monte Carlo run diverged from its analytic prediction.
    #[error("tracking diverged: empirical MSE {empirical:.6e} exceeds {limit:.6e}")]
    TrackingDivergence { empirical: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
