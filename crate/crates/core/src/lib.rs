//! Self- and mutually exciting point processes with flexible residual
//! distributions.
//!
//! The classical exponential Hawkes process draws each compensator increment
//! from a unit exponential distribution. This crate generalizes that: the
//! inter-arrival recursion `tau_n = phi^{-1}(eps_n)` accepts residuals
//! `eps_n` from any unit-mean distribution on positive support, while the
//! intensity state keeps the exponential-decay Markov structure, so
//! simulation, likelihood evaluation, and residual inference all stay cheap.
//!
//! Modules follow the pipeline:
//!
//! * [`residuals`] - the residual distribution family (exponential, gamma,
//!   trapezoid-exponential mixture, empirical resampling pool).
//! * [`univariate`] - the one-dimensional process: kernels, simulation,
//!   conditional intensity, residual inference, filtered historical
//!   simulation.
//! * [`multivariate`] - the m-type mutually exciting extension with
//!   competing-inversion simulation and per-type residual inference.
//! * [`estimate`] - maximum likelihood, exponential quasi-MLE, two-step GMM,
//!   and numerical standard errors.
//! * [`baselines`] - the gamma-kernel Hawkes comparison model.
//! * [`volatility`] - closed-form Hawkes volatility for the symmetric
//!   bivariate model plus Monte-Carlo volatility from simulated paths.
//! * [`marketdata`] - quote ingestion into mid-price change events and the
//!   sparse-observation preprocessing.
//! * [`diagnostics`] - KS tests, histogram and Q-Q plot data.

pub mod baselines;
pub mod diagnostics;
mod error;
pub mod estimate;
pub mod marketdata;
pub mod multivariate;
pub mod residuals;
pub mod series;
pub mod special;
pub mod univariate;
pub mod volatility;

pub use error::{Error, Result};
pub use residuals::ResidualDistribution;
pub use series::{EventSeries, LambdaPath};
pub use univariate::{ExcitationParams, StoppingRule};
