//! Calculus and self-consistency properties of the univariate process:
//! monotonicity and inversion of phi, derivative identity against psi, and
//! KS checks that inference at true parameters recovers the generating
//! residual law.

mod common;

use common::central_diff;
use flexhawkes::diagnostics::{ks_pvalue, ks_statistic, ks_two_sample};
use flexhawkes::univariate::{self, fhs, infer_residuals, phi, phi_inv, psi, simulate};
use flexhawkes::{EventSeries, ExcitationParams, ResidualDistribution, StoppingRule};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exp1_cdf(x: f64) -> f64 {
    -(-x).exp_m1()
}

#[test]
fn phi_is_strictly_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let p = ExcitationParams::new(0.3, 0.6, 1.1).unwrap();
    for _ in 0..500 {
        let t1 = rng.random_range(0.0..10.0);
        let t2 = t1 + rng.random_range(1e-9..5.0);
        assert!(phi(t1, 1.0, &p) < phi(t2, 1.0, &p));
    }
}

#[test]
fn phi_derivative_matches_psi() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..200 {
        let mu = rng.random_range(0.05..2.0);
        let beta = rng.random_range(0.2..3.0);
        let alpha = rng.random_range(0.01..beta * 0.9);
        let p = ExcitationParams::new(mu, alpha, beta).unwrap();
        let lambda = rng.random_range(mu..mu + 4.0);
        let t = rng.random_range(0.01..8.0);
        let fd = central_diff(|s| phi(s, lambda, &p), t, 1e-6);
        let exact = psi(t, lambda, &p);
        assert!(
            (fd - exact).abs() < 1e-6 * exact.abs().max(1e-12),
            "t = {t}: fd = {fd}, psi = {exact}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn phi_inv_round_trip(
        mu in 0.05_f64..2.0,
        beta in 0.2_f64..4.0,
        ratio in 0.05_f64..0.95,
        excess in 0.0_f64..5.0,
        eps in 1e-6_f64..30.0,
    ) {
        let alpha = ratio * beta;
        let p = ExcitationParams::new(mu, alpha, beta).unwrap();
        let lambda_prev = mu + excess;
        let t = phi_inv(eps, lambda_prev, &p).unwrap();
        let back = phi(t, lambda_prev, &p);
        prop_assert!((back - eps).abs() <= 1e-10 * eps.max(1.0));
    }

    #[test]
    fn simulated_series_round_trips_through_csv(
        seed in 0u64..1000,
        n in 5usize..60,
    ) {
        let p = ExcitationParams::new(0.4, 0.3, 0.9).unwrap();
        let d = ResidualDistribution::unit_exponential();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (series, _) = simulate(&p, &d, p.mu, StoppingRule::Events(n), &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        series.write_csv(&path).unwrap();
        let back = EventSeries::read_csv(&path).unwrap();
        prop_assert_eq!(back.len(), series.len());
        for (a, b) in back.times().iter().zip(series.times()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn exponential_residuals_pass_ks_against_exp1() {
    // Simulation and inference form an exact inverse pair, so inferred
    // residuals at true parameters reproduce Exp(1).
    let p = ExcitationParams::new(0.2, 0.5, 0.8).unwrap();
    let d = ResidualDistribution::unit_exponential();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let (series, _) = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap();
    let (res, _) = infer_residuals(&series, &p, p.mu).unwrap();
    let stat = ks_statistic(&res, exp1_cdf);
    let pv = ks_pvalue(stat, res.len());
    assert!(pv > 0.01, "KS stat {stat}, p = {pv}");
}

#[test]
fn gamma_residuals_are_self_consistent() {
    let p = ExcitationParams::new(0.2, 0.5, 0.8).unwrap();
    let d = ResidualDistribution::gamma(2.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let (series, _) = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap();
    let (res, _) = infer_residuals(&series, &p, p.mu).unwrap();
    let stat = ks_statistic(&res, |x| d.cdf(x));
    let pv = ks_pvalue(stat, res.len());
    assert!(pv > 0.01, "KS stat {stat}, p = {pv}");
}

#[test]
fn vanishing_excitation_gives_poisson_interarrivals() {
    // alpha -> 0 with exponential residuals: inter-arrivals approach
    // Exp(mu) after the first event.
    let p = ExcitationParams::new(0.7, 1e-9, 1.0).unwrap();
    let d = ResidualDistribution::unit_exponential();
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let (series, _) = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap();
    let taus = series.inter_arrivals();
    let stat = ks_statistic(&taus[1..], |x| -(-p.mu * x).exp_m1());
    let pv = ks_pvalue(stat, taus.len() - 1);
    assert!(pv > 0.01, "KS stat {stat}, p = {pv}");
}

#[test]
fn fhs_reproduces_interarrival_distribution() {
    // FHS paths resampling Hawkes residuals should be two-sample close to a
    // fresh Hawkes simulation at the same parameters.
    let p = ExcitationParams::new(0.2, 0.5, 0.8).unwrap();
    let d = ResidualDistribution::unit_exponential();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let (observed, _) = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap();
    let paths = fhs(&observed, &p, p.mu, 1, &mut rng).unwrap();
    let fresh = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap().0;
    let dist = ks_two_sample(&paths[0].inter_arrivals(), &fresh.inter_arrivals());
    assert!(dist < 0.03, "two-sample KS distance = {dist}");
}

#[test]
fn fhs_matches_tail_quantile_mass() {
    // The share of FHS inter-arrivals below the observed 20th percentile
    // should be close to 20 percent.
    let p = ExcitationParams::new(0.2, 0.5, 0.8).unwrap();
    let d = ResidualDistribution::gamma(2.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let (observed, _) = simulate(&p, &d, p.mu, StoppingRule::Events(10_000), &mut rng).unwrap();
    let mut taus = observed.inter_arrivals();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cutoff = taus[(0.2 * taus.len() as f64) as usize];
    let paths = fhs(&observed, &p, p.mu, 10, &mut rng).unwrap();
    let pooled: Vec<f64> = paths.iter().flat_map(|s| s.inter_arrivals()).collect();
    let frac = pooled.iter().filter(|&&t| t < cutoff).count() as f64 / pooled.len() as f64;
    assert!((frac - 0.2).abs() < 0.02, "fraction below cutoff = {frac}");
}

#[test]
fn loglik_identity_per_event_for_exponential() {
    // log f(phi) + log psi == log lambda - phi term by term when the
    // residual is Exp(1).
    let p = ExcitationParams::new(0.3, 0.4, 1.0).unwrap();
    let d = ResidualDistribution::unit_exponential();
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let (series, path) = simulate(&p, &d, 1.0, StoppingRule::Events(500), &mut rng).unwrap();
    let (res, path2) = infer_residuals(&series, &p, 1.0).unwrap();
    // inference recovers tau from accumulated absolute times, so the state
    // path agrees only to floating-point round-trip accuracy
    for (a, b) in path.values.iter().zip(&path2.values) {
        assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
    let total_flex = univariate::loglik(&series, &p, &d, 1.0).unwrap();
    let manual: f64 = res
        .iter()
        .zip(&path2.values)
        .map(|(eps, lambda)| lambda.ln() - eps)
        .sum();
    assert!((total_flex - manual).abs() < 1e-9);
}
