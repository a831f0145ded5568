use thiserror::Error;

/// Errors surfaced by the workbench. Numerical rounding failures abort the
/// computation rather than silently degrading certified integer outputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("wrong tower level: expected {expected}, got {got}")]
    Level { expected: &'static str, got: &'static str },

    #[error("element is not a unit")]
    NotUnit,

    #[error("value {value} failed integer rounding (residual {residual:.3e} >= {tol:.1e})")]
    Rounding { value: f64, residual: f64, tol: f64 },

    #[error("internal consistency check failed: {0}")]
    Check(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
