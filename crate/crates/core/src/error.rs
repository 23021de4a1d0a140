use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The trapezoid-exponential density would be negative somewhere for
    /// this (a, ell); the derived mixture weight and intercept are carried
    /// for diagnostics.
    #[error("invalid trapezoid parameters: p = {p:.6}, c = {c:.6} (need 0 < p <= 1 and c >= 0)")]
    InvalidTrapezoid { p: f64, c: f64 },

    #[error("empirical residual distribution has no closed-form density")]
    NoDensity,

    #[error("invalid event series: {0}")]
    InvalidSeries(String),

    /// `F(phi(t))` reached 1 to machine precision; `t` is the time at which
    /// the survival probability underflowed.
    #[error("survival underflow: residual CDF at phi(t) is 1 to machine precision for t = {t}")]
    SurvivalUnderflow { t: f64 },

    #[error("insufficient data: {got} events, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error in {path}: {msg}")]
    Csv { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
