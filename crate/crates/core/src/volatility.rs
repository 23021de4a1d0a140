//! Closed-form Hawkes volatility for the symmetric bivariate model with
//! independent marks, plus Monte-Carlo volatility from simulated paths.
//!
//! The closed form chains three small linear solves: the stationary mean
//! intensity, a 2x2 continuous Lyapunov equation for the second-moment
//! object (solved exactly through its 4x4 Kronecker linearization), and a
//! linear equation for the covariance-accumulation matrix B. The scalar
//! volatility is a quadratic form in u = (1, -1) scaled by sqrt(horizon).
//!
//! The second-moment equation admits two readings: its solution taken as
//! the raw moment E[ll^T] (literal) or as the centered covariance of the
//! intensity (adding E[l] E[l]^T wherever the raw moment is consumed). At
//! alpha = 0 the solution is the zero matrix, which is only consistent with
//! the centered reading (a Poisson pair has E[ll^T] = mu mu^T != 0), and
//! the Monte-Carlo oracles confirm it, so centered is the default.

use crate::error::{Error, Result};
use crate::multivariate::{self, MvExcitationParams};
use crate::residuals::ResidualDistribution;
use crate::series::EventSeries;
use crate::univariate::StoppingRule;
use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// First and second moments of the per-type mark (jump size) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkMoments {
    pub mean: [f64; 2],
    pub second: [f64; 2],
}

impl MarkMoments {
    pub fn new(mean: [f64; 2], second: [f64; 2]) -> Result<Self> {
        for i in 0..2 {
            if !(mean[i] > 0.0) || !(second[i] > 0.0) {
                return Err(Error::InvalidParameter(
                    "mark moments must be positive".into(),
                ));
            }
            if second[i] < mean[i] * mean[i] * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "second moment {} below squared mean {}",
                    second[i],
                    mean[i] * mean[i]
                )));
            }
        }
        Ok(MarkMoments { mean, second })
    }

    /// Unit marks: every jump has size 1.
    pub fn unit() -> Self {
        MarkMoments { mean: [1.0, 1.0], second: [1.0, 1.0] }
    }

    /// Sample moments of the marks carried by a bivariate series.
    pub fn from_series(series: &EventSeries) -> Result<Self> {
        let marks = series
            .marks()
            .ok_or_else(|| Error::InvalidSeries("series carries no marks".into()))?;
        let mut sums = [0.0; 2];
        let mut sq = [0.0; 2];
        let mut counts = [0usize; 2];
        for (&ty, &m) in series.types().iter().zip(marks) {
            let i = ty as usize;
            if i > 1 {
                return Err(Error::InvalidSeries("mark moments require 2 types".into()));
            }
            sums[i] += m;
            sq[i] += m * m;
            counts[i] += 1;
        }
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::InvalidSeries(
                "both event types need at least one mark".into(),
            ));
        }
        MarkMoments::new(
            [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64],
            [sq[0] / counts[0] as f64, sq[1] / counts[1] as f64],
        )
    }
}

/// Which reading of the second-moment equation feeds the B solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentInterpretation {
    /// Lyapunov solution used as E[ll^T] directly.
    Literal,
    /// Lyapunov solution read as Cov(l); E[ll^T] = solution + E[l] E[l]^T.
    #[default]
    Centered,
}

/// All pieces of the closed-form solve, serialized to the volatility JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilitySolution {
    pub expected_lambda: [f64; 2],
    /// The second-moment object consumed by the B equation (raw E[ll^T]).
    pub lambda_second: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub hvol: f64,
    pub horizon: f64,
    pub interpretation: MomentInterpretation,
}

fn dims2(params: &MvExcitationParams) -> Result<(Matrix2<f64>, Matrix2<f64>, Vector2<f64>)> {
    if params.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "closed-form volatility is defined for 2 types, got {}",
            params.dim()
        )));
    }
    let alpha = Matrix2::new(
        params.alpha[0][0],
        params.alpha[0][1],
        params.alpha[1][0],
        params.alpha[1][1],
    );
    let beta = Matrix2::new(params.beta[0], 0.0, 0.0, params.beta[1]);
    let mu = Vector2::new(params.mu[0], params.mu[1]);
    Ok((alpha, beta, mu))
}

/// Stationary mean intensity `E[lambda] = (beta - alpha)^{-1} beta mu`.
pub fn expected_lambda(params: &MvExcitationParams) -> Result<[f64; 2]> {
    let (alpha, beta, mu) = dims2(params)?;
    let inv = (beta - alpha).try_inverse().ok_or_else(|| {
        Error::Numerical("beta - alpha is singular: stability condition violated".into())
    })?;
    let e = inv * beta * mu;
    Ok([e[0], e[1]])
}

/// Solve the continuous Lyapunov equation
/// `(alpha - beta) M + M (alpha - beta)^T + alpha Dg(E[lambda]) alpha^T = 0`
/// exactly via its 4x4 Kronecker linearization.
pub fn lambda_second_moment(
    params: &MvExcitationParams,
    expected: &[f64; 2],
) -> Result<[[f64; 2]; 2]> {
    let (alpha, beta, _) = dims2(params)?;
    let a = alpha - beta;
    let q = alpha * Matrix2::new(expected[0], 0.0, 0.0, expected[1]) * alpha.transpose();
    // (I (x) A + A (x) I) vec(M) = -vec(Q), column-major stacking.
    let mut k = Matrix4::zeros();
    for col_block in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                // I (x) A: block-diagonal copies of A
                k[(col_block * 2 + i, col_block * 2 + j)] += a[(i, j)];
            }
        }
    }
    for bi in 0..2 {
        for bj in 0..2 {
            for d in 0..2 {
                // A (x) I: A[bi][bj] on the diagonal of block (bi, bj)
                k[(bi * 2 + d, bj * 2 + d)] += a[(bi, bj)];
            }
        }
    }
    let rhs = -Vector4::new(q[(0, 0)], q[(1, 0)], q[(0, 1)], q[(1, 1)]);
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("Lyapunov linearization is singular".into()))?;
    Ok([[sol[0], sol[2]], [sol[1], sol[3]]])
}

fn zbar(marks: &MarkMoments) -> Matrix2<f64> {
    Matrix2::new(marks.mean[0], marks.mean[1], marks.mean[0], marks.mean[1])
}

fn zbar2(marks: &MarkMoments) -> Matrix2<f64> {
    Matrix2::new(marks.second[0], marks.second[1], marks.second[0], marks.second[1])
}

/// Solve for B in
/// `B (alpha-beta)^T + Zbar^T o M + Dg(E) (alpha o Zbar)^T - Dg(z) E E^T = 0`
/// where `o` is the elementwise product, `M` the raw second-moment object,
/// and `Dg(z)` the diagonal matrix of per-type mark means.
pub fn solve_b(
    params: &MvExcitationParams,
    marks: &MarkMoments,
    expected: &[f64; 2],
    lambda_second: &[[f64; 2]; 2],
) -> Result<[[f64; 2]; 2]> {
    let (alpha, beta, _) = dims2(params)?;
    let at = (alpha - beta).transpose();
    let at_inv = at
        .try_inverse()
        .ok_or_else(|| Error::Numerical("(alpha - beta)^T is singular".into()))?;
    let e = Vector2::new(expected[0], expected[1]);
    let m = Matrix2::new(
        lambda_second[0][0],
        lambda_second[0][1],
        lambda_second[1][0],
        lambda_second[1][1],
    );
    let zb = zbar(marks);
    let dg_z = Matrix2::new(marks.mean[0], 0.0, 0.0, marks.mean[1]);
    let dg_e = Matrix2::new(e[0], 0.0, 0.0, e[1]);
    let rhs = dg_z * e * e.transpose()
        - zb.transpose().component_mul(&m)
        - dg_e * alpha.component_mul(&zb).transpose();
    let b = rhs * at_inv;
    Ok([[b[(0, 0)], b[(0, 1)]], [b[(1, 0)], b[(1, 1)]]])
}

/// Full closed-form pipeline to the scalar volatility over `[0, horizon]`:
/// `sqrt(u^T [Zbar o B + (Zbar o B)^T + Zbar2 o Dg(E)] u * horizon)` with
/// `u = (1, -1)`.
pub fn hawkes_vol(
    params: &MvExcitationParams,
    marks: &MarkMoments,
    horizon: f64,
    interpretation: MomentInterpretation,
) -> Result<VolatilitySolution> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let expected = expected_lambda(params)?;
    let lyap = lambda_second_moment(params, &expected)?;
    let e = Vector2::new(expected[0], expected[1]);
    let second = match interpretation {
        MomentInterpretation::Literal => lyap,
        MomentInterpretation::Centered => {
            let raw = Matrix2::new(lyap[0][0], lyap[0][1], lyap[1][0], lyap[1][1])
                + e * e.transpose();
            [[raw[(0, 0)], raw[(0, 1)]], [raw[(1, 0)], raw[(1, 1)]]]
        }
    };
    let b_arr = solve_b(params, marks, &expected, &second)?;
    let b = Matrix2::new(b_arr[0][0], b_arr[0][1], b_arr[1][0], b_arr[1][1]);
    let zb = zbar(marks);
    let dg_e = Matrix2::new(expected[0], 0.0, 0.0, expected[1]);
    let zb_b = zb.component_mul(&b);
    let inner = zb_b + zb_b.transpose() + zbar2(marks).component_mul(&dg_e);
    let u = Vector2::new(1.0, -1.0);
    let quad = (u.transpose() * inner * u)[(0, 0)];
    if quad < 0.0 {
        return Err(Error::Numerical(format!(
            "volatility quadratic form is negative ({quad:.6e}); inner matrix {inner:?}"
        )));
    }
    Ok(VolatilitySolution {
        expected_lambda: expected,
        lambda_second: second,
        b: b_arr,
        hvol: (quad * horizon).sqrt(),
        horizon,
        interpretation,
    })
}

/// Mark-weighted count difference `sum_{type 0, lo < t <= hi} z - sum_{type 1}
/// z` (unit weights when the series has no marks).
pub fn weighted_count_diff(series: &EventSeries, lo: f64, hi: f64) -> f64 {
    let mut diff = 0.0;
    for i in 0..series.len() {
        let t = series.times()[i];
        if t <= lo || t > hi {
            continue;
        }
        let w = series.marks().map_or(1.0, |m| m[i]);
        match series.types()[i] {
            0 => diff += w,
            1 => diff -= w,
            _ => {}
        }
    }
    diff
}

/// Sample standard deviation across paths of the mark-weighted up-minus-down
/// difference over `(0, t]`.
pub fn empirical_vol(paths: &[EventSeries], t: f64) -> Result<f64> {
    if paths.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "empirical volatility needs at least 2 paths, got {}",
            paths.len()
        )));
    }
    let diffs: Vec<f64> = paths.iter().map(|p| weighted_count_diff(p, 0.0, t)).collect();
    Ok(sample_sd(&diffs))
}

fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Monte-Carlo volatility: simulate `n_paths` bivariate paths over
/// `burn_in + horizon`, optionally bootstrapping marks per type from the
/// given pools, and return the sample SD of the weighted count difference
/// over the window `(burn_in, burn_in + horizon]`.
///
/// Paths run in parallel on seeds pre-drawn from `seed`, so results do not
/// depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_vol(
    params: &MvExcitationParams,
    dists: &[ResidualDistribution],
    lambda0: &[f64],
    horizon: f64,
    burn_in: f64,
    n_paths: usize,
    mark_pools: Option<&[Vec<f64>; 2]>,
    seed: u64,
) -> Result<f64> {
    if n_paths < 2 {
        return Err(Error::InvalidParameter(format!(
            "Monte-Carlo volatility needs at least 2 paths, got {n_paths}"
        )));
    }
    if let Some(pools) = mark_pools {
        if pools.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidParameter("empty mark bootstrap pool".into()));
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<[u64; 3]> = (0..n_paths)
        .map(|_| [master.random(), master.random(), master.random()])
        .collect();
    let diffs: Result<Vec<f64>> = seeds
        .into_par_iter()
        .map(|s| {
            let mut rngs = [ChaCha8Rng::seed_from_u64(s[0]), ChaCha8Rng::seed_from_u64(s[1])];
            let (series, _) = multivariate::simulate_mv(
                params,
                dists,
                lambda0,
                StoppingRule::Horizon(burn_in + horizon),
                &mut rngs,
            )?;
            let mut diff = 0.0;
            let mut mark_rng = ChaCha8Rng::seed_from_u64(s[2]);
            for i in 0..series.len() {
                let t = series.times()[i];
                if t <= burn_in {
                    continue;
                }
                let ty = series.types()[i] as usize;
                let w = match mark_pools {
                    Some(pools) => pools[ty][mark_rng.random_range(0..pools[ty].len())],
                    None => 1.0,
                };
                diff += if ty == 0 { w } else { -w };
            }
            Ok(diff)
        })
        .collect();
    Ok(sample_sd(&diffs?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_params() -> MvExcitationParams {
        MvExcitationParams::new(
            vec![1.0, 1.0],
            vec![vec![0.2, 0.1], vec![0.1, 0.2]],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn expected_lambda_zero_alpha_is_mu() {
        let p = MvExcitationParams::new(
            vec![0.7, 1.3],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![1.0, 2.0],
        )
        .unwrap();
        let e = expected_lambda(&p).unwrap();
        assert!((e[0] - 0.7).abs() < 1e-14);
        assert!((e[1] - 1.3).abs() < 1e-14);
    }

    #[test]
    fn expected_lambda_symmetric_hand_solve() {
        // (I - alpha)^{-1} mu with unit beta: each component 0.9 / 0.63 = 10/7.
        let e = expected_lambda(&symmetric_params()).unwrap();
        assert!((e[0] - 10.0 / 7.0).abs() < 1e-12, "e = {e:?}");
        assert!((e[1] - 10.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_zero_alpha_gives_zero() {
        let p = MvExcitationParams::new(
            vec![0.7, 1.3],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![1.0, 2.0],
        )
        .unwrap();
        let e = expected_lambda(&p).unwrap();
        let m = lambda_second_moment(&p, &e).unwrap();
        for row in m {
            for v in row {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lyapunov_residual_is_tiny_for_random_stable_draws() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let beta = [rng.random_range(0.5..3.0), rng.random_range(0.5..3.0)];
            let scale = rng.random_range(0.1..0.9);
            let a_self = rng.random_range(0.1..1.0);
            let a_cross = rng.random_range(0.0..1.0);
            let norm = a_self + a_cross;
            let alpha = vec![
                vec![a_self / norm * scale * beta[0], a_cross / norm * scale * beta[0]],
                vec![a_cross / norm * scale * beta[1], a_self / norm * scale * beta[1]],
            ];
            let p = MvExcitationParams::new(
                vec![rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)],
                alpha,
                beta.to_vec(),
            )
            .unwrap();
            let e = expected_lambda(&p).unwrap();
            let m = lambda_second_moment(&p, &e).unwrap();
            let (al, be, _) = dims2(&p).unwrap();
            let a = al - be;
            let mm = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
            let q = al * Matrix2::new(e[0], 0.0, 0.0, e[1]) * al.transpose();
            let resid = a * mm + mm * a.transpose() + q;
            assert!(resid.norm() < 1e-10, "residual {}", resid.norm());
        }
    }

    #[test]
    fn b_equation_residual_is_tiny() {
        let p = symmetric_params();
        let marks = MarkMoments::new([1.2, 0.9], [2.0, 1.1]).unwrap();
        let e = expected_lambda(&p).unwrap();
        let m = lambda_second_moment(&p, &e).unwrap();
        let b = solve_b(&p, &marks, &e, &m).unwrap();
        let (al, be, _) = dims2(&p).unwrap();
        let bm = Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]);
        let mm = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
        let ev = Vector2::new(e[0], e[1]);
        let zb = zbar(&marks);
        let dg_z = Matrix2::new(marks.mean[0], 0.0, 0.0, marks.mean[1]);
        let dg_e = Matrix2::new(e[0], 0.0, 0.0, e[1]);
        let resid = bm * (al - be).transpose()
            + zb.transpose().component_mul(&mm)
            + dg_e * al.component_mul(&zb).transpose()
            - dg_z * ev * ev.transpose();
        assert!(resid.norm() < 1e-10, "residual {}", resid.norm());
    }

    #[test]
    fn unit_marks_and_zero_alpha_reduce_to_poisson() {
        // Centered reading: B = 0 and Hvol^2 = (mu1 + mu2) t exactly.
        let p = MvExcitationParams::new(
            vec![0.7, 1.3],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![1.0, 2.0],
        )
        .unwrap();
        let sol = hawkes_vol(&p, &MarkMoments::unit(), 100.0, MomentInterpretation::Centered)
            .unwrap();
        let expect = (2.0_f64 * 100.0).sqrt();
        assert!((sol.hvol - expect).abs() < 1e-10, "hvol = {}", sol.hvol);
        for row in sol.b {
            for v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hvol_scales_as_sqrt_time() {
        let p = symmetric_params();
        let marks = MarkMoments::unit();
        let a = hawkes_vol(&p, &marks, 1.0, MomentInterpretation::Centered).unwrap();
        let b = hawkes_vol(&p, &marks, 2.0, MomentInterpretation::Centered).unwrap();
        assert!((b.hvol - 2.0_f64.sqrt() * a.hvol).abs() < 1e-12);
    }

    #[test]
    fn hvol_is_invariant_under_type_swap() {
        let p = MvExcitationParams::symmetric_bivariate([0.8, 1.1], 0.3, 0.15, [1.4, 1.9]).unwrap();
        let swapped =
            MvExcitationParams::symmetric_bivariate([1.1, 0.8], 0.3, 0.15, [1.9, 1.4]).unwrap();
        let marks = MarkMoments::new([1.0, 2.0], [1.5, 5.0]).unwrap();
        let marks_swapped = MarkMoments::new([2.0, 1.0], [5.0, 1.5]).unwrap();
        let a = hawkes_vol(&p, &marks, 10.0, MomentInterpretation::Centered).unwrap();
        let b = hawkes_vol(&swapped, &marks_swapped, 10.0, MomentInterpretation::Centered).unwrap();
        assert!((a.hvol - b.hvol).abs() < 1e-10);
    }

    #[test]
    fn hvol_scales_linearly_in_marks() {
        let p = symmetric_params();
        let kappa = 2.5;
        let base = MarkMoments::new([1.0, 1.5], [1.4, 3.0]).unwrap();
        let scaled = MarkMoments::new(
            [kappa * 1.0, kappa * 1.5],
            [kappa * kappa * 1.4, kappa * kappa * 3.0],
        )
        .unwrap();
        let a = hawkes_vol(&p, &base, 5.0, MomentInterpretation::Centered).unwrap();
        let b = hawkes_vol(&p, &scaled, 5.0, MomentInterpretation::Centered).unwrap();
        assert!((b.hvol - kappa * a.hvol).abs() < 1e-10);
    }

    #[test]
    fn empirical_vol_basics() {
        // identical paths -> zero
        let s = EventSeries::new(vec![1.0, 2.0], vec![0, 1], None).unwrap();
        assert_eq!(empirical_vol(&[s.clone(), s.clone()], 10.0).unwrap(), 0.0);
        // terminal diffs +1 and -1 -> sample SD sqrt(2)
        let up = EventSeries::new(vec![1.0], vec![0], None).unwrap();
        let down = EventSeries::new(vec![1.0], vec![1], None).unwrap();
        let sd = empirical_vol(&[up, down], 10.0).unwrap();
        assert!((sd - 2.0_f64.sqrt()).abs() < 1e-14);
        // fewer than two paths is rejected
        let one = EventSeries::new(vec![1.0], vec![0], None).unwrap();
        assert!(empirical_vol(&[one], 10.0).is_err());
    }

    #[test]
    fn weighted_diff_uses_marks_and_window() {
        let s = EventSeries::new(
            vec![0.5, 1.0, 2.0, 3.0],
            vec![0, 1, 0, 1],
            Some(vec![2.0, 0.5, 1.0, 4.0]),
        )
        .unwrap();
        assert_eq!(weighted_count_diff(&s, 0.0, 2.0), 2.0 - 0.5 + 1.0);
        assert_eq!(weighted_count_diff(&s, 1.0, 3.0), 1.0 - 4.0);
    }
}
