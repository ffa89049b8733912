use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("signal is not real-valued: amplitude at -{freq:?} is not the conjugate of the amplitude at {freq:?}")]
    NotReal { freq: Vec<f64> },

    #[error("group closure would exceed {cap} members")]
    ClosureTooLarge { cap: usize },

    #[error("unsupported seminorm exponent p = {0} (expected 1 or 2)")]
    UnsupportedExponent(u32),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("diffusion primitive not symmetric: A[{i}][{j}] differs from A[{j}][{i}] by {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("sigma * sigma^T differs from A' at entry ({i},{j}), u = {u}: residual {residual:e}")]
    SqrtMismatch { i: usize, j: usize, u: f64, residual: f64 },

    #[error("A'(u) not positive semidefinite at u = {u}: eigenvalue {eigenvalue:e} along axis pair ({i},{j})")]
    NotPsd { i: usize, j: usize, u: f64, eigenvalue: f64 },

    #[error("state {u} outside the model bound [-{bound}, {bound}]")]
    OutOfBound { u: f64, bound: f64 },

    #[error("frequency {freq} on axis {axis} is not commensurate with super-cell length {length}; apply commensurate_project first")]
    Incommensurate { axis: usize, freq: f64, length: f64 },

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("non-finite value produced at step {step}, cell {cell}")]
    NonFinite { step: usize, cell: usize },

    #[error("insufficient snapshots: need at least {needed}, have {have}")]
    InsufficientSnapshots { needed: usize, have: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
