use thiserror::Error;

/// Errors raised by the traveling-wave engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("`{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Parameters outside the analysed family (for instance β = 0, where F vanishes identically).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// The origin is not a saddle, so no decaying exponential branch exists.
    #[error("regular equilibrium is not a saddle (beta*c = {0})")]
    NotSaddle(f64),

    #[error("recurrence denominator F(k*alpha) vanishes at k = {0}")]
    SingularRecurrence(usize),

    #[error("no convergent continuity root: {0}")]
    NoConvergentRoot(String),

    #[error("orbit trace is empty")]
    EmptyTrace,

    #[error("orbit trace already carries slow-time samples")]
    AlreadyReparametrized,

    #[error("evaluation on the singular line u = {0}")]
    OnSingularLine(f64),

    #[error(
        "adaptive quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})"
    )]
    Quadrature { estimate: f64, error: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular Newton step")]
    SingularStep,

    /// Newton landed on the A = 0 line of trivial stationary points.
    #[error("solver converged to the trivial solution A = 0")]
    TrivialSolution,

    #[error("negative radicand {0}")]
    NegativeRadicand(f64),

    #[error("denominator vanishes")]
    ZeroDenominator,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}
