use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock truncation must keep at least levels 0 and 1 (got n_max = {0})")]
    InvalidTruncation(usize),

    #[error("Fock level {level} exceeds n_max = {n_max}")]
    LevelOutOfRange { level: usize, n_max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("coupling order {order} exceeds n_max = {n_max}")]
    OrderExceedsTruncation { order: usize, n_max: usize },

    #[error("combined model needs two distinct orders (both were {0})")]
    RepeatedOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("builder is not periodic with period {period}: defect {defect:.3e} at t = {t}")]
    NotPeriodic { period: f64, t: f64, defect: f64 },

    #[error("norm drift {drift:.3e} at t = {t} exceeds tolerance {tolerance:.1e}")]
    NormDrift { t: f64, drift: f64, tolerance: f64 },

    #[error("sample times must be non-negative and strictly increasing after snapping to the step grid (t = {0})")]
    BadTimeGrid(f64),

    #[error("population {leakage:.3e} in the top Fock levels exceeds {threshold:.1e}")]
    Leakage { leakage: f64, threshold: f64 },

    #[error("validity monitor breached: {0}")]
    ValidityBreach(String),

    #[error("truncation order {0} is not supported (maximum 3)")]
    OrderTooHigh(usize),

    #[error("zero detuning in tone {0}")]
    ZeroDetuning(usize),

    #[error("fixed point did not converge after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("drive configuration does not match the two-tone microwave pattern: {0}")]
    DrivePattern(String),

    #[error("need at least {needed} entries, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
