use thiserror::Error;

/// Errors raised by the solver and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A derivative of the potential was requested at a singular point.
    #[error("domain error: {what} at x = {x}")]
    Domain { what: String, x: f64 },

    /// An energy fell outside the interval where the problem is posed.
    #[error("energy {e} outside the admissible window ({lo}, {hi})")]
    Window { e: f64, lo: f64, hi: f64 },

    /// A potential, marker triple or energy window failed admissibility.
    #[error("admissibility violated: {0}")]
    Admissibility(String),

    /// The ODE integrator failed (step floor, pole, non-finite state).
    #[error("integration failed: {0}")]
    Integration(String),

    /// The normalization mass underflowed or was not finite.
    #[error("degenerate solution: {0}")]
    Degenerate(String),

    /// Energy-grid refinement hit the step floor.
    #[error("angle resolution lost near E = {e}")]
    Resolution { e: f64 },

    #[error("matching system ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    /// The Volterra operator is not a contraction for this h.
    #[error("Volterra series does not contract (norm bound {norm})")]
    NotContracting { norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
