//! Goodness-of-fit helpers: Kolmogorov-Smirnov tests, histogram binning, and
//! Q-Q pair extraction used by the residual diagnostics outputs.

use crate::error::{Error, Result};
use crate::residuals::ResidualDistribution;

/// One-sample KS statistic `sup_x |F_n(x) - F(x)|` against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic p-value of the one-sample KS statistic at sample size `n`,
/// from the Kolmogorov limit distribution.
pub fn ks_pvalue(statistic: f64, n: usize) -> f64 {
    let lambda = (n as f64).sqrt() * statistic;
    kolmogorov_tail(lambda)
}

/// Two-sample KS statistic between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|u, v| u.partial_cmp(v).unwrap());
    xb.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < xa.len() && j < xb.len() {
        let (va, vb) = (xa[i], xb[j]);
        if va <= vb {
            i += 1;
        }
        if vb <= va {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `P(sup |B(t)| > lambda)` for the Brownian bridge: the Kolmogorov tail
/// `2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        let signed = if k % 2 == 1 { term } else { -term };
        sum += signed;
        if term < 1e-14 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Equal-width histogram over `[min, max]` of the data. Returns `n_bins + 1`
/// edges and `n_bins` counts.
pub fn histogram(data: &[f64], n_bins: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if data.is_empty() || n_bins == 0 {
        return Err(Error::InvalidParameter(
            "histogram requires data and at least one bin".into(),
        ));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };
    let edges: Vec<f64> = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0usize; n_bins];
    for &x in data {
        let idx = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok((edges, counts))
}

/// Q-Q pairs of the sample against a reference residual distribution at the
/// plotting positions `(i - 0.5) / n`: `(theoretical quantile, order
/// statistic)`.
pub fn qq_pairs(data: &[f64], reference: &ResidualDistribution) -> Result<Vec<(f64, f64)>> {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for (i, &x) in sorted.iter().enumerate() {
        let p = (i as f64 + 0.5) / n as f64;
        out.push((reference.quantile(p)?, x));
    }
    Ok(out)
}
