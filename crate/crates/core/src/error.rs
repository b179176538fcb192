use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time grid needs at least 2 steps, got {0}")]
    TooFewSteps(usize),

    #[error("paths live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("time {t} is not a grid node")]
    OffGrid { t: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("system is singular to working precision (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("terminal penalty below permanent-impact floor: beta = {beta:.6e} < 0")]
    BetaNegative { beta: f64 },

    #[error("operation requires deterministic coefficients, got a stochastic spec")]
    StochasticCoefficient,

    #[error("{what} blew past the guard {guard:.1e} at t = {t:.6} (norm {norm:.3e})")]
    BlowUp { what: &'static str, t: f64, norm: f64, guard: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("regression basis is degenerate at step {step}: {detail}")]
    DegenerateRegression { step: usize, detail: String },

    #[error("unsupported coefficient spec for Monte Carlo: {0}")]
    UnsupportedCoefficient(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
