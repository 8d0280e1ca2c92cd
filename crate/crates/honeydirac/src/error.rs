//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("cutoff must be at least 1 (the degenerate pair needs the first dual shell)")]
    CutoffTooSmall,

    #[error("grid resolution {n} is below the dealiasing requirement {required}")]
    GridTooCoarse { n: usize, required: usize },

    #[error("fields are built on different index sets")]
    IndexSetMismatch,

    #[error("saturable denominator is non-positive on the grid (min 1 + V_L = {min:.6e})")]
    SaturableDomain { min: f64 },

    #[error("negative density sample {value:.6e} passed to the nonlinearity")]
    NegativeDensity { value: f64 },

    #[error("potential fails honeycomb symmetry checks (realness {realness:.3e}, inversion {inversion:.3e}, rotation {rotation:.3e})")]
    PotentialSymmetry {
        realness: f64,
        inversion: f64,
        rotation: f64,
    },

    #[error("eigensolver residual {residual:.3e} exceeds allowance {allowed:.3e}")]
    EigenResidual { residual: f64, allowed: f64 },

    #[error("lowest eigenvalue cluster has dimension {found}, expected 2 (potential amplitude outside the two-fold regime)")]
    Degeneracy { found: usize },

    #[error("symmetry classification failed: {0}")]
    Symmetry(String),

    #[error("resolvent shift {shift:.3e} outside the stable window (|shift| < {window:.3e})")]
    ShiftWindow { shift: f64, window: f64 },

    #[error("correction sweep is not contracting (ratio {ratio:.3})")]
    InnerDiverged { ratio: f64 },

    #[error("inner iteration did not converge within {max} sweeps")]
    InnerMaxIter { max: usize },

    #[error("outer iteration did not converge within {max} steps")]
    OuterMaxIter { max: usize },

    #[error("energy correction left the perturbative regime (|mu| = {mu:.3})")]
    MuOutOfRange { mu: f64 },

    #[error("second consistency defect {defect:.3e} above the symmetry budget {budget:.3e}")]
    Cancellation { defect: f64, budget: f64 },

    #[error("expected 6 sign changes on the equator, found {found}")]
    BifurcationCount { found: usize },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI: 2 config, 3 domain/regime, 4 certification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Certification(_) => 4,
            _ => 3,
        }
    }
}
