//! The m-type mutually exciting model.
//!
//! Each type i carries its own baseline `mu_i` and decay `beta_i`; an event
//! of type j jumps type i's state by `alpha[i][j]`. Simulation draws one
//! residual per type per step, inverts each type's `phi`, and the smallest
//! candidate inter-arrival wins (competing inversion). All states then decay
//! over the realized inter-arrival.

use crate::error::{Error, Result};
use crate::residuals::ResidualDistribution;
use crate::series::{EventSeries, LambdaPath};
use crate::univariate::{Segment, StoppingRule};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the m-type model. `alpha[i][j]` is the jump of type i's
/// state caused by a type-j event; `beta[i]` the decay of type i.
///
/// Stability gate: the spectral radius of the matrix `alpha[i][j] / beta[i]`
/// must be below 1 (the multivariate branching condition). Off-diagonal and
/// even diagonal alphas may be zero, which decouples channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvExcitationParams {
    pub mu: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
}

impl MvExcitationParams {
    pub fn new(mu: Vec<f64>, alpha: Vec<Vec<f64>>, beta: Vec<f64>) -> Result<Self> {
        let m = mu.len();
        if m == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if beta.len() != m || alpha.len() != m || alpha.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParameter(format!(
                "parameter shapes disagree: mu is {m}-dim, alpha must be {m}x{m}, beta {m}-dim"
            )));
        }
        if mu.iter().any(|&x| !(x > 0.0)) || beta.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter("mu and beta must be positive".into()));
        }
        if alpha.iter().flatten().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter("alpha entries must be nonnegative".into()));
        }
        let params = MvExcitationParams { mu, alpha, beta };
        let rho = params.spectral_radius();
        if !(rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "unstable parameters: spectral radius of alpha[i][j]/beta[i] is {rho:.4} >= 1"
            )));
        }
        Ok(params)
    }

    /// Symmetric bivariate constructor: `alpha11 = alpha22` (self) and
    /// `alpha12 = alpha21` (cross).
    pub fn symmetric_bivariate(
        mu: [f64; 2],
        alpha_self: f64,
        alpha_cross: f64,
        beta: [f64; 2],
    ) -> Result<Self> {
        Self::new(
            mu.to_vec(),
            vec![vec![alpha_self, alpha_cross], vec![alpha_cross, alpha_self]],
            beta.to_vec(),
        )
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Spectral radius of the branching matrix `alpha[i][j] / beta[i]`,
    /// computed by power iteration (the matrix is nonnegative, so the
    /// dominant eigenvalue is real and reachable from a positive start).
    pub fn spectral_radius(&self) -> f64 {
        let m = self.dim();
        let mut v = vec![1.0; m];
        let mut rho = 0.0;
        for _ in 0..200 {
            let mut w = vec![0.0; m];
            for i in 0..m {
                for j in 0..m {
                    w[i] += self.alpha[i][j] / self.beta[i] * v[j];
                }
            }
            let norm = w.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
            if norm == 0.0 {
                return 0.0;
            }
            for x in &mut w {
                *x /= norm;
            }
            if (norm - rho).abs() < 1e-14 * norm.max(1.0) {
                return norm;
            }
            rho = norm;
            v = w;
        }
        rho
    }

    /// The between-event segment of type i after an event of type `prev`,
    /// or the pre-first-event segment when no event has occurred yet.
    fn segment(&self, i: usize, lambda_prev: f64, prev_type: Option<usize>) -> Segment {
        let excess = match prev_type {
            Some(j) => lambda_prev - self.mu[i] + self.alpha[i][j],
            None => lambda_prev - self.mu[i],
        };
        Segment::raw(self.mu[i], excess, self.beta[i])
    }
}

fn check_lambda0(params: &MvExcitationParams, lambda0: &[f64]) -> Result<()> {
    if lambda0.len() != params.dim() {
        return Err(Error::InvalidParameter(format!(
            "lambda0 has length {}, expected {}",
            lambda0.len(),
            params.dim()
        )));
    }
    for (i, (&l, &mu)) in lambda0.iter().zip(&params.mu).enumerate() {
        if !(l >= mu) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda0[{i}] = {l} must satisfy lambda0 >= mu = {mu}"
            )));
        }
    }
    Ok(())
}

fn check_dists(params: &MvExcitationParams, dists: &[ResidualDistribution]) -> Result<()> {
    if dists.len() != params.dim() {
        return Err(Error::InvalidParameter(format!(
            "{} residual distributions for a {}-type model",
            dists.len(),
            params.dim()
        )));
    }
    Ok(())
}

/// Simulate by competing inversion. Each step draws one residual per type
/// from that type's stream in `rngs` (stream i drives type i, so relabeling
/// types together with their streams relabels the output), inverts each
/// type's `phi`, takes the minimum as the realized inter-arrival, and decays
/// every state over it. Floating-point ties break toward the lowest type
/// index.
pub fn simulate_mv<R: Rng>(
    params: &MvExcitationParams,
    dists: &[ResidualDistribution],
    lambda0: &[f64],
    stop: StoppingRule,
    rngs: &mut [R],
) -> Result<(EventSeries, Vec<LambdaPath>)> {
    let m = params.dim();
    check_dists(params, dists)?;
    check_lambda0(params, lambda0)?;
    if rngs.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{} RNG streams for a {m}-type model (one per type)",
            rngs.len()
        )));
    }
    let mut lambda = lambda0.to_vec();
    let mut prev_type: Option<usize> = None;
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut types = Vec::new();
    let mut paths: Vec<LambdaPath> = lambda0
        .iter()
        .map(|&l| LambdaPath { lambda0: l, values: Vec::new() })
        .collect();
    loop {
        match stop {
            StoppingRule::Events(n) if times.len() >= n => break,
            StoppingRule::Horizon(h) if t > h => break,
            _ => {}
        }
        let mut tau = f64::INFINITY;
        let mut winner = 0;
        for i in 0..m {
            let eps = dists[i].sample(&mut rngs[i]);
            let cand = params.segment(i, lambda[i], prev_type).phi_inv(eps)?;
            if cand < tau {
                tau = cand;
                winner = i;
            }
        }
        t += tau;
        if let StoppingRule::Horizon(h) = stop {
            if t > h {
                break;
            }
        }
        for i in 0..m {
            lambda[i] = params.segment(i, lambda[i], prev_type).psi(tau);
            debug_assert!(lambda[i] >= params.mu[i]);
            paths[i].values.push(lambda[i]);
        }
        times.push(t);
        types.push(winner as u32);
        prev_type = Some(winner);
    }
    let series = EventSeries::new(times, types, None)?;
    Ok((series, paths))
}

/// Multivariate log-likelihood: for each event, the winning type contributes
/// its density term and every other type its survival term
/// `log(1 - F(phi_i(tau_n)))`.
///
/// Underflowed survival terms and zero densities contribute `-inf`, which
/// estimation treats as a rejected parameter point.
pub fn loglik_mv(
    series: &EventSeries,
    params: &MvExcitationParams,
    dists: &[ResidualDistribution],
    lambda0: &[f64],
) -> Result<f64> {
    let m = params.dim();
    check_dists(params, dists)?;
    check_lambda0(params, lambda0)?;
    if dists.iter().any(|d| !d.has_density()) {
        return Err(Error::NoDensity);
    }
    if series.num_types() > m {
        return Err(Error::InvalidSeries(format!(
            "series has {} types but the model has {m}",
            series.num_types()
        )));
    }
    let mut lambda = lambda0.to_vec();
    let mut prev_type: Option<usize> = None;
    let mut ll = 0.0;
    let mut prev_t = 0.0;
    for (&t, &z) in series.times().iter().zip(series.types()) {
        let tau = t - prev_t;
        let z = z as usize;
        for i in 0..m {
            let seg = params.segment(i, lambda[i], prev_type);
            let x = seg.phi(tau);
            if i == z {
                ll += dists[i].log_pdf(x)? + seg.psi(tau).ln();
            } else {
                ll += dists[i].log_survival(x);
            }
            lambda[i] = seg.psi(tau);
        }
        prev_type = Some(z);
        prev_t = t;
    }
    Ok(ll)
}

/// Per-type residual inference: for each type i, accumulate type i's `phi`
/// increments across every step and emit the running sum when a type-i event
/// arrives.
///
/// The span from the origin to the first type-i event counts as that type's
/// first residual, matching univariate inference when m = 1.
pub fn infer_residuals_mv(
    series: &EventSeries,
    params: &MvExcitationParams,
    lambda0: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<LambdaPath>)> {
    let m = params.dim();
    check_lambda0(params, lambda0)?;
    if series.num_types() > m {
        return Err(Error::InvalidSeries(format!(
            "series has {} types but the model has {m}",
            series.num_types()
        )));
    }
    if let Some(&first) = series.times().first() {
        if !(first > 0.0) {
            return Err(Error::InvalidSeries(
                "first event must occur strictly after the origin".into(),
            ));
        }
    }
    let mut lambda = lambda0.to_vec();
    let mut prev_type: Option<usize> = None;
    let mut acc = vec![0.0_f64; m];
    let mut residuals: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut paths: Vec<LambdaPath> = lambda0
        .iter()
        .map(|&l| LambdaPath { lambda0: l, values: Vec::new() })
        .collect();
    let mut prev_t = 0.0;
    for (&t, &z) in series.times().iter().zip(series.types()) {
        let tau = t - prev_t;
        let z = z as usize;
        for i in 0..m {
            let seg = params.segment(i, lambda[i], prev_type);
            acc[i] += seg.phi(tau);
            lambda[i] = seg.psi(tau);
            paths[i].values.push(lambda[i]);
        }
        residuals[z].push(acc[z]);
        acc[z] = 0.0;
        prev_type = Some(z);
        prev_t = t;
    }
    Ok((residuals, paths))
}
