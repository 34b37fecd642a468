use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("instability at t = {t}: value {value:e} at node {index}")]
    Instability { t: f64, index: usize, value: f64 },

    #[error("level {level} not attained at t = {t}")]
    LevelNotAttained { level: f64, t: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature tolerance not met: error estimate {estimate:e} exceeds {requested:e}")]
    ToleranceNotMet { estimate: f64, requested: f64 },

    #[error("under-determined fit: {0}")]
    UnderDetermined(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid ansatz parameters: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
