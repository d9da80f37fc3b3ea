use thiserror::Error;

/// Errors raised by the spectral layer, the solver and the diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SqgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("hermitian symmetry violated at mode ({m1}, {m2}): deviation {deviation:e}")]
    Asymmetry { m1: i64, m2: i64, deviation: f64 },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("blow-up at t = {t} (step {step}): non-finite coefficient at mode ({m1}, {m2})")]
    BlowUp { t: f64, step: u64, m1: i64, m2: i64 },

    #[error("step budget of {limit} exceeded at t = {t}")]
    Budget { limit: u64, t: f64 },

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("modulus construction failed: {0}")]
    Construction(String),

    #[error("separation {r} outside modulus table range (0, {r_max}]")]
    Range { r: f64, r_max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no admissible scaling found: {0}")]
    NoScaling(String),
}

pub type Result<T> = std::result::Result<T, SqgError>;
