use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("no real solution: the admissible interval for the profile is empty")]
    NoRealSolution,
    #[error("first-integral drift {drift:e} exceeds limit {limit:e}; reduce the step")]
    DriftExceeded { drift: f64, limit: f64 },
    #[error("profile is not oscillatory (degenerate discriminant or interval)")]
    NonOscillatory,
    #[error("parameters are not on the degenerate curve (discriminant {delta:e})")]
    NotDegenerate { delta: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("every grid node lies on the singular set")]
    AllSingular,
    #[error("grid has too few nodes ({nx} x {ny}) for this operation")]
    TooFewNodes { nx: usize, ny: usize },
    #[error("Newton iteration did not converge after {iterations} iterations (last update {update:e})")]
    NonConverged { iterations: usize, update: f64 },
    #[error("trajectory left the chart domain near (x, y) = ({x}, {y})")]
    ChartOverflow { x: f64, y: f64 },
    #[error("integration path hit the singular set near (x, y) = ({x}, {y})")]
    SingularCrossing { x: f64, y: f64 },
    #[error("Weierstrass construction requires c0 = 0 (got {c0})")]
    NotFlat { c0: f64 },
    #[error("holonomy needs a period spanned by the domain")]
    PeriodUnavailable,
}
