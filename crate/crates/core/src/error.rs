use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mode ({k1}, {k2}) lies outside the truncation box of radius {n}")]
    ModeOutOfRange { k1: i32, k2: i32, n: usize },
    #[error("the zero mode is excluded from mean-zero fields")]
    ZeroMode,
    #[error("truncation radii differ ({left} vs {right})")]
    TruncationMismatch { left: usize, right: usize },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("noise window (level {level}, step {step}) is out of range: {reason}")]
    WindowOutOfRange {
        level: u32,
        step: usize,
        reason: &'static str,
    },
    #[error(
        "implicit transport solve failed: residual {residual:e} after {iterations} iterations \
         (Galerkin dimension {dimension})"
    )]
    SolverFailure {
        residual: f64,
        iterations: usize,
        dimension: usize,
    },
    #[error(
        "simulation aborted at step {step}: residual {residual:e} after {iterations} iterations"
    )]
    SimulationAborted {
        step: usize,
        residual: f64,
        iterations: usize,
    },
    #[error("time grids are not aligned: {0}")]
    MisalignedGrids(String),
    #[error("{aborted} of {total} paths aborted")]
    StudyFailed { aborted: usize, total: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
