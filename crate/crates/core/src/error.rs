use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("population inversion (rho_aa = {rho_aa:.6e} > rho_bb = {rho_bb:.6e}): trapping model not valid")]
    Inversion { rho_aa: f64, rho_bb: f64 },

    #[error("{solver} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("plateau not converged: relative spread {spread:.3e} exceeds {limit}")]
    NotConverged { spread: f64, limit: f64 },

    #[error("stationary solvers disagree by {difference:.3e} (Newton vs long-time integration)")]
    CrossValidation { difference: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
