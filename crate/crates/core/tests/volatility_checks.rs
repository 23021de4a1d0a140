//! Volatility oracles: the Lyapunov solve against an independent dense
//! Gaussian elimination, Monte-Carlo agreement for the symmetric
//! unit-mark case, and the Poisson closed form at alpha = 0.

mod common;

use flexhawkes::multivariate::MvExcitationParams;
use flexhawkes::volatility::{
    empirical_vol, expected_lambda, hawkes_vol, lambda_second_moment, monte_carlo_vol,
    MarkMoments, MomentInterpretation,
};
use flexhawkes::{EventSeries, ResidualDistribution};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Plain Gaussian elimination with partial pivoting, independent of the
/// library's linear algebra.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

fn symmetric_params() -> MvExcitationParams {
    MvExcitationParams::symmetric_bivariate([0.5, 0.5], 0.3, 0.2, [1.2, 1.2]).unwrap()
}

#[test]
fn expected_lambda_matches_cofactor_inverse() {
    // 2x2 inverse by cofactors as an independent route.
    let p = MvExcitationParams::new(
        vec![1.0, 1.0],
        vec![vec![0.2, 0.1], vec![0.1, 0.2]],
        vec![1.0, 1.0],
    )
    .unwrap();
    let e = expected_lambda(&p).unwrap();
    // (beta - alpha) = [[0.8, -0.1], [-0.1, 0.8]], det 0.63
    let det = 0.8 * 0.8 - 0.1 * 0.1;
    let rhs = [1.0, 1.0]; // beta mu
    let by_hand = [
        (0.8 * rhs[0] + 0.1 * rhs[1]) / det,
        (0.1 * rhs[0] + 0.8 * rhs[1]) / det,
    ];
    assert!((e[0] - by_hand[0]).abs() < 1e-12);
    assert!((e[1] - by_hand[1]).abs() < 1e-12);
    assert!((e[0] - 10.0 / 7.0).abs() < 1e-12);
}

#[test]
fn event_rate_matches_expected_lambda() {
    // Ergodic check: the realized long-run rate per type approaches the
    // stationary mean intensity.
    let p = MvExcitationParams::new(
        vec![1.0, 1.0],
        vec![vec![0.2, 0.1], vec![0.1, 0.2]],
        vec![1.0, 1.0],
    )
    .unwrap();
    let e = expected_lambda(&p).unwrap();
    let d = ResidualDistribution::unit_exponential();
    let mut rngs = vec![
        ChaCha8Rng::seed_from_u64(1001),
        ChaCha8Rng::seed_from_u64(1002),
    ];
    let horizon = 5_000.0;
    let (series, _) = flexhawkes::multivariate::simulate_mv(
        &p,
        &[d.clone(), d],
        &[e[0], e[1]],
        flexhawkes::StoppingRule::Horizon(horizon),
        &mut rngs,
    )
    .unwrap();
    for ty in 0..2 {
        let count = series.types().iter().filter(|&&z| z as usize == ty).count();
        let rate = count as f64 / horizon;
        assert!(
            (rate - e[ty]).abs() < 0.05 * e[ty],
            "type {ty}: rate {rate} vs {}" ,
            e[ty]
        );
    }
}

#[test]
fn lyapunov_solution_matches_hand_rolled_4x4_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..50 {
        let beta = [rng.random_range(0.6..2.5), rng.random_range(0.6..2.5)];
        let scale: f64 = rng.random_range(0.1..0.85);
        let s: f64 = rng.random_range(0.2..1.0);
        let c: f64 = rng.random_range(0.0..0.8);
        let norm = s + c;
        let alpha = vec![
            vec![s / norm * scale * beta[0], c / norm * scale * beta[0]],
            vec![c / norm * scale * beta[1], s / norm * scale * beta[1]],
        ];
        let p = MvExcitationParams::new(
            vec![rng.random_range(0.3..1.5), rng.random_range(0.3..1.5)],
            alpha.clone(),
            beta.to_vec(),
        )
        .unwrap();
        let e = expected_lambda(&p).unwrap();
        let m = lambda_second_moment(&p, &e).unwrap();

        // Independent route: assemble (I (x) A + A (x) I) x = -vec(Q) and
        // eliminate by hand. Column-major stacking [m11, m21, m12, m22].
        let a = [
            [alpha[0][0] - beta[0], alpha[0][1]],
            [alpha[1][0], alpha[1][1] - beta[1]],
        ];
        let q = {
            // alpha Dg(e) alpha^T
            let mut out = [[0.0; 2]; 2];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    for k in 0..2 {
                        *v += alpha[i][k] * e[k] * alpha[j][k];
                    }
                }
            }
            out
        };
        let mut k4 = vec![vec![0.0; 4]; 4];
        for blk in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    k4[blk * 2 + i][blk * 2 + j] += a[i][j];
                }
            }
        }
        for bi in 0..2 {
            for bj in 0..2 {
                for dgn in 0..2 {
                    k4[bi * 2 + dgn][bj * 2 + dgn] += a[bi][bj];
                }
            }
        }
        let rhs = vec![-q[0][0], -q[1][0], -q[0][1], -q[1][1]];
        let x = solve_dense(k4, rhs);
        let oracle = [[x[0], x[2]], [x[1], x[3]]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (m[i][j] - oracle[i][j]).abs() < 1e-10 * oracle[i][j].abs().max(1.0),
                    "entry ({i},{j}): {} vs {}",
                    m[i][j],
                    oracle[i][j]
                );
            }
        }
    }
}

#[test]
fn closed_form_matches_monte_carlo_for_unit_marks() {
    let p = symmetric_params();
    let d = ResidualDistribution::unit_exponential();
    let horizon = 50.0;
    let sol = hawkes_vol(&p, &MarkMoments::unit(), horizon, MomentInterpretation::Centered)
        .unwrap();
    let mc = monte_carlo_vol(
        &p,
        &[d.clone(), d],
        &[0.5, 0.5],
        horizon,
        30.0,
        10_000,
        None,
        2024,
    )
    .unwrap();
    let rel = (sol.hvol - mc).abs() / mc;
    assert!(rel < 0.10, "closed form {} vs MC {mc} (rel {rel:.3})", sol.hvol);
}

#[test]
fn poisson_limit_matches_closed_form_and_monte_carlo() {
    let p = MvExcitationParams::new(
        vec![0.7, 1.3],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        vec![1.0, 2.0],
    )
    .unwrap();
    let horizon = 100.0;
    let analytic = ((0.7_f64 + 1.3) * horizon).sqrt();
    let sol = hawkes_vol(&p, &MarkMoments::unit(), horizon, MomentInterpretation::Centered)
        .unwrap();
    assert!((sol.hvol - analytic).abs() < 1e-10);
    let d = ResidualDistribution::unit_exponential();
    let mc = monte_carlo_vol(&p, &[d.clone(), d], &[0.7, 1.3], horizon, 0.0, 10_000, None, 2025)
        .unwrap();
    assert!(
        (mc - analytic).abs() < 0.05 * analytic,
        "MC {mc} vs analytic {analytic}"
    );
}

#[test]
fn literal_interpretation_fails_the_poisson_limit() {
    // The discriminating case behind the default: reading the Lyapunov
    // solution as the raw second moment gives B != 0 at alpha = 0 for
    // asymmetric baselines, contradicting independent Poisson counts. (In
    // fully symmetric settings the two readings coincide because the
    // constant-matrix difference vanishes against u = (1, -1).)
    let p = MvExcitationParams::new(
        vec![0.2, 1.8],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        vec![0.2, 5.0],
    )
    .unwrap();
    let horizon = 100.0;
    let analytic = ((0.2_f64 + 1.8) * horizon).sqrt();
    let literal = hawkes_vol(&p, &MarkMoments::unit(), horizon, MomentInterpretation::Literal)
        .unwrap();
    let centered = hawkes_vol(&p, &MarkMoments::unit(), horizon, MomentInterpretation::Centered)
        .unwrap();
    assert!((centered.hvol - analytic).abs() < 1e-10);
    assert!(
        (literal.hvol - analytic).abs() > 0.05 * analytic,
        "literal reading unexpectedly matched: {} vs {analytic}",
        literal.hvol
    );
}

#[test]
fn poisson_empirical_vol_is_sqrt_two_mu_t() {
    // 10^4 unit-mark Poisson pairs at rate 1 each over t = 100: SD of the
    // count difference is sqrt(200).
    let mut rng = ChaCha8Rng::seed_from_u64(1030);
    let horizon = 100.0;
    let mut paths = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let mut times = Vec::new();
        let mut types = Vec::new();
        let mut merged: Vec<(f64, u32)> = Vec::new();
        for ty in 0..2u32 {
            let mut t = 0.0;
            loop {
                t += -rng.random::<f64>().ln();
                if t > horizon {
                    break;
                }
                merged.push((t, ty));
            }
        }
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (t, ty) in merged {
            times.push(t);
            types.push(ty);
        }
        paths.push(EventSeries::new(times, types, None).unwrap());
    }
    let sd = empirical_vol(&paths, horizon).unwrap();
    let expect = 200.0_f64.sqrt();
    assert!((sd - expect).abs() < 0.03 * expect, "sd = {sd}, expect {expect}");
}
