use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("delta must lie in (-1,0), got {0}")]
    DeltaOutOfRange(f64),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error(
        "bump of width {width} at radius {radius} is under-resolved (local spacing {spacing})"
    )]
    UnresolvedSpec {
        width: f64,
        radius: f64,
        spacing: f64,
    },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("weighted norms are only supported up to order 2, got {0}")]
    UnsupportedOrder(u32),
    #[error("tridiagonal factorization failed for mode {mode}")]
    SingularSystem { mode: usize },
    #[error("right-hand side does not decay fast enough: tail ratio {ratio:.3e}")]
    NonDecayingRhs { ratio: f64 },
    #[error("selection system for (rho, eta) is near singular (condition number {cond:.3e})")]
    NearSingularSelection { cond: f64 },
    #[error("Picard iteration diverged at iteration {iteration} (norm {norm:.3e})")]
    DivergenceDetected { iteration: usize, norm: f64 },
    #[error("no convergence after {iterations} iterations (last ratio {last_ratio:.3e})")]
    NoConvergence { iterations: usize, last_ratio: f64 },
    #[error("data size epsilon = {epsilon:.3e} exceeds the small-data threshold {threshold:.3e}")]
    SmallnessThreshold { epsilon: f64, threshold: f64 },
    #[error("alpha = {0} leaves no cone (need alpha < 1)")]
    DegenerateCone(f64),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
