use thiserror::Error;

/// Failures reported by the numerical routines.
///
/// Conditions that still produce a usable value (degenerate cyclic states,
/// near-singular perturbative denominators) are carried as flags on the
/// corresponding result types instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid numeric policy: {0}")]
    InvalidPolicy(String),

    #[error("step controller could not meet tolerance {tol:e} near t = {t}")]
    StepFailure { t: f64, tol: f64 },

    #[error("unitarity defect {defect:e} exceeds tolerance {tol:e}")]
    UnitarityLoss { defect: f64, tol: f64 },

    #[error("self-consistent solve did not converge (residuals {residuals:?})")]
    NoConvergence { residuals: [f64; 2] },

    #[error("no root in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("spectrum not converged: defect {defect:e} at N = {n}")]
    NonConvergent { defect: f64, n: usize },

    #[error("cyclic states are degenerate; phases depend on the chosen basis")]
    DegenerateCyclicStates,
}

pub type Result<T> = std::result::Result<T, Error>;
