use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid does not resolve the basis: {0}")]
    UnderResolvedGrid(String),
    #[error("under-resolved evolution: mass drift {drift:e} at t = {t}")]
    UnderResolvedEvolution { drift: f64, t: f64 },
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("shooting bracket not found: {0}")]
    ShootingBracket(String),
    #[error("inconsistent Gagliardo-Nirenberg constant: sampled {sampled} exceeds {sharp}")]
    InconsistentConstant { sampled: f64, sharp: f64 },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("basis size {dim} exceeds cap {cap}")]
    SizeExceeded { dim: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quadrature refinement failed: {0}")]
    Refinement(String),
    #[error("Krylov evolution failed: {0}")]
    Krylov(String),
    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("cutoff annihilates the state")]
    NotRenormalizable,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
