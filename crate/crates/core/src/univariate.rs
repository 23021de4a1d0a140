//! The one-dimensional flexible-residual process.
//!
//! Between events the intensity segment is `psi(t) = mu + E e^{-beta t}`
//! with excess `E = lambda_prev - mu + alpha` (the decayed state plus the
//! jump contributed by the event that just occurred). Its running integral
//! `phi` maps elapsed time to accumulated residual mass; inverting `phi` on
//! an i.i.d. unit-mean draw produces the next inter-arrival, and evaluating
//! `phi` at an observed inter-arrival recovers the residual.
//!
//! Before the first event there is no excitation to attribute, so drivers
//! here start the first segment with excess `lambda0 - mu` (no `alpha`
//! term). With `lambda0 = mu` that is exactly the empty-history start of a
//! classical Hawkes process.

use crate::error::{Error, Result};
use crate::residuals::ResidualDistribution;
use crate::series::{EventSeries, LambdaPath};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Excitation parameters of one intensity channel: baseline `mu`, jump
/// `alpha`, decay rate `beta`, with the usual stability condition
/// `alpha < beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ExcitationParams {
    pub fn new(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(mu > 0.0) || !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "excitation parameters must be positive: mu = {mu}, alpha = {alpha}, beta = {beta}"
            )));
        }
        if !(alpha < beta) {
            return Err(Error::InvalidParameter(format!(
                "stability requires alpha < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(ExcitationParams { mu, alpha, beta })
    }

    /// Branching ratio `alpha / beta`.
    pub fn branching_ratio(&self) -> f64 {
        self.alpha / self.beta
    }
}

/// One between-event intensity segment `psi(t) = mu + excess e^{-beta t}`.
///
/// `after_event` builds the segment that follows an observed event (the
/// `alpha` jump attributed to it is included); `initial` builds the
/// pre-first-event segment where no jump has occurred yet.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    mu: f64,
    excess: f64,
    beta: f64,
}

impl Segment {
    pub fn after_event(lambda_prev: f64, params: &ExcitationParams) -> Segment {
        Segment {
            mu: params.mu,
            excess: lambda_prev - params.mu + params.alpha,
            beta: params.beta,
        }
    }

    pub fn initial(lambda0: f64, params: &ExcitationParams) -> Segment {
        Segment {
            mu: params.mu,
            excess: lambda0 - params.mu,
            beta: params.beta,
        }
    }

    pub(crate) fn raw(mu: f64, excess: f64, beta: f64) -> Segment {
        Segment { mu, excess, beta }
    }

    /// Intensity-state value at elapsed time `t`.
    pub fn psi(&self, t: f64) -> f64 {
        self.mu + self.excess * (-self.beta * t).exp()
    }

    /// Integral of `psi` over [0, t]; strictly increasing, `phi(0) = 0`.
    pub fn phi(&self, t: f64) -> f64 {
        // 1 - e^{-bt} via expm1 keeps small-t accuracy.
        self.mu * t + self.excess * (-(-self.beta * t).exp_m1()) / self.beta
    }

    /// Inverse of `phi`: the elapsed time at which the accumulated mass
    /// reaches `eps`.
    ///
    /// Safeguarded Newton with the analytic derivative `psi`. `phi` is
    /// concave and increasing, so Newton iterates started from the left
    /// bracket `eps / psi(0)` increase monotonically and never overshoot.
    pub fn phi_inv(&self, eps: f64) -> Result<f64> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phi_inv requires eps >= 0, got {eps}"
            )));
        }
        if eps == 0.0 {
            return Ok(0.0);
        }
        if self.excess == 0.0 {
            return Ok(eps / self.mu);
        }
        let tol = 1e-13 * eps.max(1.0);
        let mut t = eps / (self.mu + self.excess); // phi(t) <= psi(0) t
        for _ in 0..200 {
            let diff = self.phi(t) - eps;
            if diff.abs() <= tol {
                return Ok(t);
            }
            let step = diff / self.psi(t);
            t -= step;
            if step.abs() <= 1e-16 * t.max(1.0) {
                return Ok(t);
            }
        }
        Err(Error::Numerical(format!(
            "phi_inv did not converge for eps = {eps}"
        )))
    }
}

/// `psi(t; lambda_prev, theta)` following an event with state `lambda_prev`.
pub fn psi(t: f64, lambda_prev: f64, params: &ExcitationParams) -> f64 {
    Segment::after_event(lambda_prev, params).psi(t)
}

/// `phi(t; lambda_prev, theta)`, the integral of `psi` over [0, t].
pub fn phi(t: f64, lambda_prev: f64, params: &ExcitationParams) -> f64 {
    Segment::after_event(lambda_prev, params).phi(t)
}

/// `phi^{-1}(eps; lambda_prev, theta)`.
pub fn phi_inv(eps: f64, lambda_prev: f64, params: &ExcitationParams) -> Result<f64> {
    Segment::after_event(lambda_prev, params).phi_inv(eps)
}

/// State update at an arrival: `lambda_n = psi(tau_n; lambda_prev, theta)`.
pub fn lambda_update(tau: f64, lambda_prev: f64, params: &ExcitationParams) -> f64 {
    psi(tau, lambda_prev, params)
}

/// Conditional intensity at elapsed time `t` since the last event: the
/// residual hazard at `phi(t)` times `psi(t)`.
///
/// With unit-exponential residuals the hazard is identically 1 and this
/// reduces to `psi` exactly.
pub fn conditional_intensity(
    t: f64,
    lambda_prev: f64,
    params: &ExcitationParams,
    dist: &ResidualDistribution,
) -> Result<f64> {
    let seg = Segment::after_event(lambda_prev, params);
    let x = seg.phi(t);
    let log_surv = dist.log_survival(x);
    if log_surv == f64::NEG_INFINITY {
        return Err(Error::SurvivalUnderflow { t });
    }
    let log_pdf = dist.log_pdf(x)?;
    Ok((log_pdf - log_surv).exp() * seg.psi(t))
}

/// Stopping rule for simulation: a fixed event count or a time horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StoppingRule {
    Events(usize),
    Horizon(f64),
}

/// Simulate by residual draw and inversion: `tau_n = phi^{-1}(eps_n)`,
/// `lambda_n = psi(tau_n)`. Exact for this model (no thinning involved),
/// and reproducible given the RNG state.
pub fn simulate<R: Rng + ?Sized>(
    params: &ExcitationParams,
    dist: &ResidualDistribution,
    lambda0: f64,
    stop: StoppingRule,
    rng: &mut R,
) -> Result<(EventSeries, LambdaPath)> {
    check_lambda0(lambda0, params.mu)?;
    let mut seg = Segment::initial(lambda0, params);
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut lambdas = Vec::new();
    loop {
        match stop {
            StoppingRule::Events(n) if times.len() >= n => break,
            StoppingRule::Horizon(h) if t > h => break,
            _ => {}
        }
        let eps = dist.sample(rng);
        let tau = seg.phi_inv(eps)?;
        t += tau;
        if let StoppingRule::Horizon(h) = stop {
            if t > h {
                break;
            }
        }
        let lambda = seg.psi(tau);
        debug_assert!(lambda >= params.mu);
        times.push(t);
        lambdas.push(lambda);
        seg = Segment::after_event(lambda, params);
    }
    let series = EventSeries::univariate(times)?;
    Ok((series, LambdaPath { lambda0, values: lambdas }))
}

/// Recover the residual sequence from observed arrivals at the given
/// parameters: `eps_n = phi(tau_n)` alongside the state recursion.
///
/// `lambda0` defaults to `mu` at the call sites that estimate it; here it is
/// explicit. One residual per inter-arrival, the first measured from t = 0.
pub fn infer_residuals(
    series: &EventSeries,
    params: &ExcitationParams,
    lambda0: f64,
) -> Result<(Vec<f64>, LambdaPath)> {
    check_lambda0(lambda0, params.mu)?;
    if series.num_types() > 1 {
        return Err(Error::InvalidSeries(
            "univariate inference requires a single event type".into(),
        ));
    }
    if let Some(&first) = series.times().first() {
        if !(first > 0.0) {
            return Err(Error::InvalidSeries(
                "first event must occur strictly after the origin".into(),
            ));
        }
    }
    let mut seg = Segment::initial(lambda0, params);
    let mut residuals = Vec::with_capacity(series.len());
    let mut lambdas = Vec::with_capacity(series.len());
    for tau in series.inter_arrivals() {
        residuals.push(seg.phi(tau));
        let lambda = seg.psi(tau);
        lambdas.push(lambda);
        seg = Segment::after_event(lambda, params);
    }
    Ok((residuals, LambdaPath { lambda0, values: lambdas }))
}

/// Log-likelihood under a residual family with a density:
/// `sum_n log f_eps(phi_n(tau_n)) + log psi_n(tau_n)`.
///
/// Returns `-inf` when some observation lands where the density vanishes.
pub fn loglik(
    series: &EventSeries,
    params: &ExcitationParams,
    dist: &ResidualDistribution,
    lambda0: f64,
) -> Result<f64> {
    if !dist.has_density() {
        return Err(Error::NoDensity);
    }
    check_lambda0(lambda0, params.mu)?;
    let mut seg = Segment::initial(lambda0, params);
    let mut ll = 0.0;
    for tau in series.inter_arrivals() {
        let lambda = seg.psi(tau);
        ll += dist.log_pdf(seg.phi(tau))? + lambda.ln();
        seg = Segment::after_event(lambda, params);
    }
    Ok(ll)
}

/// Exponential-Hawkes log-likelihood `sum_n log psi_n(tau_n) - phi_n(tau_n)`,
/// the form the quasi-MLE maximizes. Identical to [`loglik`] with
/// unit-exponential residuals term by term.
pub fn hawkes_loglik(series: &EventSeries, params: &ExcitationParams, lambda0: f64) -> Result<f64> {
    check_lambda0(lambda0, params.mu)?;
    let mut seg = Segment::initial(lambda0, params);
    let mut ll = 0.0;
    for tau in series.inter_arrivals() {
        let lambda = seg.psi(tau);
        ll += lambda.ln() - seg.phi(tau);
        seg = Segment::after_event(lambda, params);
    }
    Ok(ll)
}

/// Filtered historical simulation: infer residuals from the observed series
/// at the given (estimated) parameters, then simulate `n_paths` fresh paths
/// of the same length by resampling those residuals with replacement.
///
/// Paths are generated in parallel from seeds drawn off the caller's RNG, so
/// the output is reproducible regardless of thread scheduling.
pub fn fhs<R: Rng + ?Sized>(
    series: &EventSeries,
    params: &ExcitationParams,
    lambda0: f64,
    n_paths: usize,
    rng: &mut R,
) -> Result<Vec<EventSeries>> {
    if series.is_empty() {
        return Err(Error::InvalidSeries("FHS requires a non-empty series".into()));
    }
    let (residuals, _) = infer_residuals(series, params, lambda0)?;
    let pool = ResidualDistribution::empirical(residuals)?;
    let n_events = series.len();
    let seeds: Vec<u64> = (0..n_paths).map(|_| rng.random()).collect();
    seeds
        .into_par_iter()
        .map(|seed| {
            let mut path_rng = ChaCha8Rng::seed_from_u64(seed);
            simulate(params, &pool, lambda0, StoppingRule::Events(n_events), &mut path_rng)
                .map(|(s, _)| s)
        })
        .collect()
}

fn check_lambda0(lambda0: f64, mu: f64) -> Result<()> {
    if lambda0 >= mu && lambda0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda0 must satisfy lambda0 >= mu, got lambda0 = {lambda0}, mu = {mu}"
        )))
    }
}
