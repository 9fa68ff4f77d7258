use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis is rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("frame violates invariant `{invariant}` (residual {residual:.3e})")]
    InvariantViolated {
        invariant: &'static str,
        residual: f64,
    },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("subspace is trivial; its unit sphere is empty")]
    TrivialSubspace,

    #[error("path is not closed (endpoint gap {gap:.3e})")]
    NotClosed { gap: f64 },

    #[error("invalid path descriptor: {0}")]
    InvalidPath(String),

    #[error("grid refinement did not converge near lambda = {lambda} after {depth} levels")]
    RefinementFailed { lambda: f64, depth: usize },

    #[error("no stable regularization angle found down to {min_theta:e}")]
    NoStableTheta { min_theta: f64 },

    #[error("window endpoint {mu} is an eigenvalue (detector {detector:.3e}); shift the window")]
    WindowEndpointIsEigenvalue { mu: f64, detector: f64 },

    #[error("invalid window ({mu_min}, {mu_max})")]
    InvalidWindow { mu_min: f64, mu_max: f64 },

    #[error("shift {delta} too large: eigenvalue {eigenvalue} at lambda = {lambda} lies in [-delta, 0)")]
    ShiftTooLarge {
        delta: f64,
        lambda: f64,
        eigenvalue: f64,
    },

    #[error("symplecticity drift {drift:.3e} exceeds limit; increase the step count")]
    IntegrationDrift { drift: f64 },

    #[error("too few steps: {steps} < {min}")]
    TooFewSteps { steps: usize, min: usize },

    #[error("reparametrization constraint violated at breakpoint {lambda}: {detail}")]
    Reparametrization { lambda: f64, detail: String },

    #[error("discretized operator is singular: {0}")]
    SingularDiscretization(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
