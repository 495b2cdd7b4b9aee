use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("guard violated: {0}")]
    GuardViolation(String),
    #[error("fixed point did not converge at node {node} (residual {residual:e})")]
    NonConvergent { node: usize, residual: f64 },
    #[error("blow-up at step {step}: norm {norm:e} exceeds overflow guard")]
    BlowUp { step: usize, norm: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("empty schedule")]
    EmptySchedule,
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("inconsistent tables: {0}")]
    InconsistentTables(String),
}

pub type Result<T> = std::result::Result<T, Error>;
