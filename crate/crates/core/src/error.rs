use thiserror::Error;

/// Errors produced by the library. The CLI maps these onto its exit-code
/// contract, so variants are kept coarse and stable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schedule evaluation failed: {0}")]
    ScheduleEval(String),

    #[error("schedule expression parse error: {0}")]
    ExprParse(String),

    #[error("no bounded periodic envelope: |monodromy trace| = {trace_abs} >= 2")]
    Instability { trace_abs: f64 },

    #[error("marginal stability: |monodromy trace| within {margin:e} of 2")]
    MarginalStability { margin: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration out of sector")]
    Sector,

    #[error("branch discontinuity: trajectory grid too coarse (arg step {step} >= pi)")]
    Branch { step: f64 },

    #[error("quadrature truncation: boundary mass {mass:e} exceeds budget")]
    Truncation { mass: f64 },

    #[error("quasi-periodicity violation: phase constancy defect {defect:e}")]
    QuasiPeriodicity { defect: f64 },

    #[error("closed form unavailable for this model variant")]
    UnsupportedClosedForm,

    #[error("trajectory is not periodic over tau'")]
    NonPeriodicTrajectory,

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
