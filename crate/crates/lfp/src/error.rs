//! Error type shared across the crate.

use thiserror::Error;

/// Unified error type for lattice construction, solving, integration,
/// training and experiment I/O.
#[derive(Debug, Error)]
pub enum LfpError {
    /// Requested frequency lattice would exceed the configured size cap.
    #[error("lattice with {requested} nonzero frequencies exceeds cap of {cap}")]
    LatticeTooLarge { requested: u128, cap: u64 },

    /// A scalar or structural parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The zero frequency has no decay coefficient and no spectral weight.
    #[error("the zero frequency carries no spectral coefficient; the intercept holds it")]
    ZeroFrequency,

    /// Mismatched dimensions between two objects that must agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A complex spectrum supplied as a full map was not conjugate-symmetric.
    #[error("conjugate symmetry violated at k={k:?}: |h(-k) - conj(h(k))| = {deviation:.3e}")]
    ConjugateSymmetry { k: Vec<i64>, deviation: f64 },

    /// A linear system was too ill-conditioned to solve reliably.
    #[error("linear system numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    /// A matrix that must have full row rank does not.
    #[error("matrix is rank deficient: smallest singular value {sigma_min:.3e}")]
    RankDeficient { sigma_min: f64 },

    /// Requested integrator step exceeds the explicit stability bound.
    #[error("step size {dt:.3e} exceeds stability bound {bound:.3e}")]
    StepSize { dt: f64, bound: f64 },

    /// A flow's interpolation residual grew over consecutive steps.
    #[error("flow diverged: residual grew over {steps} consecutive steps (last {residual:.3e})")]
    FlowDiverged { steps: usize, residual: f64 },

    /// Training loss blew up relative to its initial value.
    #[error("training diverged at step {step}: loss {loss:.3e} (initial {initial:.3e})")]
    TrainingDiverged { step: usize, loss: f64, initial: f64 },

    /// Problems with dataset contents (duplicates, non-finite values, ...).
    #[error("dataset error: {0}")]
    Dataset(String),

    /// Problems with experiment configuration files.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LfpError>;
