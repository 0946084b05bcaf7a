use thiserror::Error;

/// Errors raised by the measures, learners and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distributions are defined over different outcome spaces: {0}")]
    DomainMismatch(String),

    /// Absolute continuity failed. `slice` names the conditioning outcome when
    /// the failure happened inside a conditional measure.
    #[error("support mismatch{}: {detail}", slice.map(|z| format!(" in conditioning slice {z}")).unwrap_or_default())]
    SupportMismatch { detail: String, slice: Option<usize> },

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("probabilities sum to {sum}, not 1 (tolerance {tol:e})")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("invalid probability {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("covariance matrix is singular or not positive definite: {0}")]
    SingularCovariance(String),

    #[error("inverse temperature must be non-negative, got {0}")]
    NegativeGamma(f64),

    #[error("inverse temperature is zero; the identity divides by it")]
    ZeroGamma,

    #[error("prior is not supported on the hypothesis space: {0}")]
    PriorSupportMismatch(String),

    /// The Gibbs precision is singular; `null_space` holds an orthonormal
    /// basis of the unconstrained directions.
    #[error("posterior precision is singular ({} unconstrained directions)", null_space.len())]
    SingularPrecision { null_space: Vec<Vec<f64>> },

    #[error("state space of {required} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { required: u128, cap: u128 },

    #[error("prior does not factorize over (u, w_1, ..., w_m); max deviation {deviation:e}")]
    NonFactorizedPrior { deviation: f64 },

    #[error("alpha = {0} makes the joint precision singular; only the closed forms accept it")]
    DegenerateAlpha(f64),

    #[error("loss values must lie in [{lo}, {hi}], found {found}")]
    LossRangeViolation { lo: f64, hi: f64, found: f64 },

    #[error("mutual information {0:e} is too small for the lautum/mutual ratio")]
    ZeroMutualInformation(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
