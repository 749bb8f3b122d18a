use thiserror::Error;

#[derive(Debug, Error)]
pub enum DickeError {
    #[error("nonpositive cavity frequency")]
    NonpositiveCavityFrequency,
    #[error("no atoms")]
    NoAtoms,
    #[error("negative collective coupling")]
    NegativeCoupling,
    #[error("negative Rabi frequency")]
    NegativeRabi,
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),
    #[error("invalid trap specification: {0}")]
    InvalidTrap(&'static str),
    #[error("h = {0} lies outside [-1, 1]")]
    Domain(f64),
    #[error("critical coupling undefined for omega0 = {0} <= 0")]
    UndefinedCriticalCoupling(f64),
    #[error("no superradiant lobe: u + v = {0} < 0")]
    NoSuperradiantLobe(f64),
    #[error("degenerate manifold: stationarity equation vanishes identically")]
    DegenerateManifold,
    #[error("negative photon cutoff")]
    NegativeCutoff,
    #[error("basis dimension {dim} exceeds budget {budget}")]
    BasisTooLarge { dim: usize, budget: usize },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DickeError>;
