use thiserror::Error;

/// Errors raised anywhere in the simulation and estimation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time span must be positive (t_start = {t_start}, t_end = {t_end})")]
    NonPositiveSpan { t_start: f64, t_end: f64 },
    #[error("grid needs at least one step")]
    ZeroSteps,
    #[error("grid start time must be finite and non-negative, got {0}")]
    NegativeStart(f64),
    #[error("paths live on different grids")]
    GridMismatch,
    #[error("path has {found} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("path value at node {index} is not finite")]
    NonFinite { index: usize },
    #[error("replication count must be at least 1")]
    ZeroReps,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("Hurst index {0} outside (0, 1)")]
    HurstOutOfRange(f64),
    #[error("covariance matrix is not positive definite (pivot {pivot} at row {row})")]
    CovarianceNotPD { row: usize, pivot: f64 },
    #[error("step count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid must start at t = 0, starts at {0}")]
    GridNotAtOrigin(f64),
    #[error("bad generator matrix: {0}")]
    BadGenerator(String),
    #[error("conditioning context does not fit: {0}")]
    IncompatibleContext(String),
    #[error("bad small-ball query: {0}")]
    BadQuery(String),
    #[error("quadratic-variation clock is degenerate (K = 0)")]
    DegenerateClock,
    #[error("battery needs at least one model")]
    EmptyBattery,
    #[error("report parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of floating point machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::CovarianceNotPD { .. } | Error::NonFinite { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
