//! Gamma-kernel Hawkes baseline: the comparison model whose excitation
//! kernel is `h(t) = alpha (t beta)^{k-1} e^{-beta t} / Gamma(k)`.
//!
//! There is no Markov state recursion for k != 1, so the likelihood sums
//! kernel contributions directly over a lag window chosen so the truncated
//! kernel mass is negligible, and simulation uses Ogata-style thinning with
//! a piecewise intensity bound.

use crate::error::{Error, Result};
use crate::series::EventSeries;
use crate::special;
use crate::univariate::StoppingRule;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the gamma-kernel Hawkes model. The kernel integrates to
/// `alpha / beta`, which must be below 1 for stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaKernelParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
}

impl GammaKernelParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, k: f64) -> Result<Self> {
        if !(mu > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !(k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma-kernel parameters must be positive: mu = {mu}, alpha = {alpha}, beta = {beta}, k = {k}"
            )));
        }
        if !(alpha / beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel mass alpha/beta = {} must be below 1",
                alpha / beta
            )));
        }
        Ok(GammaKernelParams { mu, alpha, beta, k })
    }

    /// Total kernel mass `int_0^inf h = alpha / beta` (the branching ratio).
    pub fn kernel_mass(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Lag beyond which the remaining kernel mass is below `tail_mass`.
    fn lag_window(&self, tail_mass: f64) -> f64 {
        // Solve Q(k, beta w) * alpha / beta < tail_mass by doubling.
        let target = tail_mass * self.beta / self.alpha;
        let mut w = (self.k + 1.0) / self.beta;
        while special::gamma_q(self.k, self.beta * w) > target {
            w *= 2.0;
            if w > 1e12 {
                break;
            }
        }
        w
    }
}

/// Kernel value `h(t)` for `t > 0`. At `t = 0` the kernel is finite only
/// for k >= 1; k < 1 diverges and the input is rejected.
pub fn gamma_kernel(t: f64, params: &GammaKernelParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("kernel requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        if params.k < 1.0 {
            return Err(Error::InvalidParameter(
                "gamma kernel diverges at t = 0 for k < 1".into(),
            ));
        }
        return Ok(if params.k == 1.0 { params.alpha } else { 0.0 });
    }
    let ln_h = params.alpha.ln() + (params.k - 1.0) * (t * params.beta).ln()
        - params.beta * t
        - special::ln_gamma(params.k);
    Ok(ln_h.exp())
}

/// Intensity at time `t` given past event times (strictly before `t`),
/// truncated to the lag window.
fn intensity(t: f64, times: &[f64], params: &GammaKernelParams, window: f64) -> f64 {
    let mut lambda = params.mu;
    for &ti in times.iter().rev() {
        let lag = t - ti;
        if lag >= window {
            break;
        }
        if lag > 0.0 {
            lambda += gamma_kernel(lag, params).unwrap_or(0.0);
        }
    }
    lambda
}

/// Log-likelihood `sum_n log lambda(t_n) - int_0^T lambda` with the
/// compensator in closed form via the regularized incomplete gamma.
///
/// `horizon` defaults to the last event time.
pub fn gamma_hawkes_loglik(
    series: &EventSeries,
    params: &GammaKernelParams,
    horizon: Option<f64>,
) -> Result<f64> {
    if series.num_types() > 1 {
        return Err(Error::InvalidSeries(
            "gamma-kernel likelihood requires a univariate series".into(),
        ));
    }
    let times = series.times();
    let t_end = horizon.unwrap_or_else(|| times.last().copied().unwrap_or(0.0));
    if let Some(&last) = times.last() {
        if t_end < last {
            return Err(Error::InvalidSeries(format!(
                "horizon {t_end} precedes the last event at {last}"
            )));
        }
    }
    let window = params.lag_window(1e-10);
    let mut ll = 0.0;
    for (n, &t) in times.iter().enumerate() {
        let lambda = intensity(t, &times[..n], params, window);
        if !(lambda > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        ll += lambda.ln();
    }
    // compensator: mu T + sum_i (alpha/beta) P(k, beta (T - t_i))
    let mut comp = params.mu * t_end;
    for &ti in times {
        comp += params.kernel_mass() * special::gamma_p(params.k, params.beta * (t_end - ti));
    }
    Ok(ll - comp)
}

/// Ogata-style thinning simulation.
///
/// Each past event's future contribution `h(u + s)` is bounded by `h(u)`
/// once the lag `u` has passed the kernel mode `(k - 1) / beta`, and by the
/// mode value before that, giving a piecewise-constant upper bound that is
/// refreshed after every candidate. Requires k >= 1 (the kernel is unbounded
/// near 0 otherwise).
pub fn gamma_hawkes_simulate<R: Rng + ?Sized>(
    params: &GammaKernelParams,
    stop: StoppingRule,
    rng: &mut R,
) -> Result<EventSeries> {
    if params.k < 1.0 {
        return Err(Error::InvalidParameter(
            "thinning simulation requires k >= 1 (kernel unbounded at 0 otherwise)".into(),
        ));
    }
    let window = params.lag_window(1e-10);
    let mode = (params.k - 1.0) / params.beta;
    let h_mode = if params.k == 1.0 {
        params.alpha
    } else {
        gamma_kernel(mode, params)?
    };
    let bound = |t: f64, times: &[f64]| -> f64 {
        let mut b = params.mu;
        for &ti in times.iter().rev() {
            let lag = t - ti;
            if lag >= window {
                break;
            }
            b += if lag < mode {
                h_mode
            } else {
                gamma_kernel(lag, params).unwrap_or(0.0)
            };
        }
        b
    };
    let mut t = 0.0;
    let mut times: Vec<f64> = Vec::new();
    loop {
        match stop {
            StoppingRule::Events(n) if times.len() >= n => break,
            StoppingRule::Horizon(h) if t > h => break,
            _ => {}
        }
        let b = bound(t, &times);
        let dt = -rng.random::<f64>().ln() / b;
        t += dt;
        if let StoppingRule::Horizon(h) = stop {
            if t > h {
                break;
            }
        }
        let lambda = intensity(t, &times, params, window);
        debug_assert!(
            lambda <= b * (1.0 + 1e-9),
            "thinning bound violated: lambda = {lambda}, bound = {b}"
        );
        if rng.random::<f64>() * b <= lambda {
            times.push(t);
        }
    }
    EventSeries::univariate(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_reduction_at_k1() {
        let p = GammaKernelParams::new(1.0, 1.0, 1.2, 1.0).unwrap();
        // h(t) = alpha e^{-beta t}
        let h = gamma_kernel(1.0, &p).unwrap();
        assert!((h - (-1.2_f64).exp()).abs() < 1e-12);
        assert!((gamma_kernel(0.0, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_mode_value_for_k2() {
        // k = 2, beta = 1: mode at t = 1 with value alpha / e.
        let p = GammaKernelParams::new(0.1, 0.5, 1.0, 2.0).unwrap();
        let at_mode = gamma_kernel(1.0, &p).unwrap();
        assert!((at_mode - 0.5 / std::f64::consts::E).abs() < 1e-12);
        assert!(gamma_kernel(0.9, &p).unwrap() < at_mode);
        assert!(gamma_kernel(1.1, &p).unwrap() < at_mode);
    }

    #[test]
    fn kernel_rejects_origin_for_small_k() {
        let p = GammaKernelParams::new(0.1, 0.5, 1.0, 0.7).unwrap();
        assert!(gamma_kernel(0.0, &p).is_err());
        assert!(gamma_kernel(0.5, &p).is_ok());
    }

    #[test]
    fn params_enforce_subcritical_mass() {
        assert!(GammaKernelParams::new(0.1, 1.0, 0.9, 1.5).is_err());
        assert!(GammaKernelParams::new(0.1, 0.0436, 0.0475, 1.4367).is_ok());
    }

    #[test]
    fn empty_series_loglik_is_minus_mu_t() {
        let p = GammaKernelParams::new(0.3, 0.1, 0.5, 2.0).unwrap();
        let s = EventSeries::univariate(vec![]).unwrap();
        let ll = gamma_hawkes_loglik(&s, &p, Some(10.0)).unwrap();
        assert!((ll - (-3.0)).abs() < 1e-12);
    }

    #[test]
    fn loglik_k1_matches_exponential_hawkes() {
        use crate::residuals::ResidualDistribution;
        use crate::univariate::{self, ExcitationParams};
        let (mu, alpha, beta) = (0.3, 0.4, 0.9);
        let kern = GammaKernelParams::new(mu, alpha, beta, 1.0).unwrap();
        let uni = ExcitationParams::new(mu, alpha, beta).unwrap();
        let d = ResidualDistribution::unit_exponential();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (s, _) =
            univariate::simulate(&uni, &d, mu, StoppingRule::Events(3000), &mut rng).unwrap();
        let a = gamma_hawkes_loglik(&s, &kern, None).unwrap();
        let b = univariate::hawkes_loglik(&s, &uni, mu).unwrap();
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "kernel = {a}, recursion = {b}");
    }

    #[test]
    fn simulate_rejects_k_below_one() {
        let p = GammaKernelParams::new(0.1, 0.2, 0.5, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gamma_hawkes_simulate(&p, StoppingRule::Events(10), &mut rng).is_err());
    }

    #[test]
    fn near_zero_alpha_is_poissonish() {
        let p = GammaKernelParams::new(0.8, 1e-9, 1.0, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = gamma_hawkes_simulate(&p, StoppingRule::Horizon(5000.0), &mut rng).unwrap();
        let rate = s.len() as f64 / 5000.0;
        assert!((rate - 0.8).abs() < 0.05, "rate = {rate}");
    }
}
