//! The residual distribution family: unit-mean laws on positive support that
//! drive the inter-arrival recursion.
//!
//! Every variant supports CDF evaluation and sampling; the continuous
//! variants also expose densities and log-survival functions for likelihood
//! work. The empirical variant is a resampling pool (bootstrap semantics)
//! and deliberately has no density.

use crate::error::{Error, Result};
use crate::special;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

/// Mixture weight and intercept of the trapezoid-exponential density.
///
/// For rate `ell` and knot `a`, the unit-mean constraint fixes
/// `p = (6 ell - 2 a ell) / (a^2 ell^2 + 4 a ell + 6)` and
/// `c = (2 - 2p - p a ell) / a`. The pair is valid (the density is
/// nonnegative and integrates to one) iff `0 < p <= 1` and `c >= 0`;
/// outside that region the error carries (p, c) for diagnostics.
pub fn trapezoid_params(a: f64, ell: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !(ell > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trapezoid requires a > 0 and ell > 0, got a = {a}, ell = {ell}"
        )));
    }
    let p = (6.0 * ell - 2.0 * a * ell) / (a * a * ell * ell + 4.0 * a * ell + 6.0);
    let c = (2.0 - 2.0 * p - p * a * ell) / a;
    if p > 0.0 && p <= 1.0 && c >= 0.0 {
        Ok((p, c))
    } else {
        Err(Error::InvalidTrapezoid { p, c })
    }
}

/// A unit-mean residual distribution on positive support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ResidualDistribution {
    /// Exp(1); makes the process an exact exponential Hawkes process.
    UnitExponential,
    /// Gamma with `shape * scale = 1` (the model's mean-one constraint).
    Gamma { shape: f64, scale: f64 },
    /// Linear density on (0, a) glued to an exponential tail of rate `ell`;
    /// the tail carries probability `p`.
    TrapezoidExp { a: f64, ell: f64 },
    /// Resampling pool: draws uniformly with replacement from `samples`.
    Empirical { samples: Vec<f64> },
}

impl ResidualDistribution {
    pub fn unit_exponential() -> Self {
        ResidualDistribution::UnitExponential
    }

    /// Gamma residual for model use; rejects parameters whose mean is not 1.
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma requires shape > 0 and scale > 0, got shape = {shape}, scale = {scale}"
            )));
        }
        if (shape * scale - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "model residuals must have mean 1: shape * scale = {}",
                shape * scale
            )));
        }
        Ok(ResidualDistribution::Gamma { shape, scale })
    }

    /// Gamma with the scale pinned to `1 / shape`.
    pub fn gamma_with_unit_mean(shape: f64) -> Result<Self> {
        Self::gamma(shape, 1.0 / shape)
    }

    /// Trapezoid-exponential; fails if (a, ell) lies outside the region
    /// where the density is nonnegative.
    pub fn trapezoid_exp(a: f64, ell: f64) -> Result<Self> {
        trapezoid_params(a, ell)?;
        Ok(ResidualDistribution::TrapezoidExp { a, ell })
    }

    /// Empirical resampling pool; all samples must be strictly positive.
    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter(
                "empirical residual pool is empty".into(),
            ));
        }
        if samples.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "empirical residual pool must be strictly positive and finite".into(),
            ));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ResidualDistribution::Empirical { samples })
    }

    /// Short name of the family, used in reports and CSV metadata.
    pub fn family_name(&self) -> &'static str {
        match self {
            ResidualDistribution::UnitExponential => "exponential",
            ResidualDistribution::Gamma { .. } => "gamma",
            ResidualDistribution::TrapezoidExp { .. } => "trapezoid_exp",
            ResidualDistribution::Empirical { .. } => "empirical",
        }
    }

    /// Density at `x >= 0`. The empirical variant has none.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidParameter(format!("pdf requires x >= 0, got {x}")));
        }
        match self {
            ResidualDistribution::UnitExponential => Ok((-x).exp()),
            ResidualDistribution::Gamma { shape, scale } => {
                if x == 0.0 {
                    return Ok(match shape {
                        k if *k > 1.0 => 0.0,
                        k if *k == 1.0 => 1.0 / scale,
                        _ => f64::INFINITY,
                    });
                }
                Ok(((shape - 1.0) * x.ln() - x / scale
                    - special::ln_gamma(*shape)
                    - shape * scale.ln())
                .exp())
            }
            ResidualDistribution::TrapezoidExp { a, ell } => {
                let (p, c) = trapezoid_params(*a, *ell).expect("validated at construction");
                if x < *a {
                    Ok((p * ell - c) / a * x + c)
                } else {
                    Ok(p * ell * (-ell * (x - a)).exp())
                }
            }
            ResidualDistribution::Empirical { .. } => Err(Error::NoDensity),
        }
    }

    /// Natural log of the density; `-inf` where the density vanishes.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        match self {
            ResidualDistribution::UnitExponential => {
                if !(x >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log_pdf requires x >= 0, got {x}"
                    )));
                }
                Ok(-x)
            }
            ResidualDistribution::Gamma { shape, scale } => {
                if !(x >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log_pdf requires x >= 0, got {x}"
                    )));
                }
                if x == 0.0 {
                    return Ok(match shape {
                        k if *k > 1.0 => f64::NEG_INFINITY,
                        k if *k == 1.0 => -scale.ln(),
                        _ => f64::INFINITY,
                    });
                }
                Ok((shape - 1.0) * x.ln() - x / scale
                    - special::ln_gamma(*shape)
                    - shape * scale.ln())
            }
            _ => self.pdf(x).map(f64::ln),
        }
    }

    /// CDF; a step function for the empirical variant.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            ResidualDistribution::UnitExponential => -(-x).exp_m1(),
            ResidualDistribution::Gamma { shape, scale } => special::gamma_p(*shape, x / scale),
            ResidualDistribution::TrapezoidExp { a, ell } => {
                let (p, c) = trapezoid_params(*a, *ell).expect("validated at construction");
                if x < *a {
                    // integral of the linear branch
                    (p * ell - c) / (2.0 * a) * x * x + c * x
                } else {
                    1.0 - p * (-ell * (x - a)).exp()
                }
            }
            ResidualDistribution::Empirical { samples } => {
                let n = samples.len();
                let k = samples.partition_point(|&s| s <= x);
                k as f64 / n as f64
            }
        }
    }

    /// `ln(1 - F(x))`, computed without forming `1 - F` where that would
    /// cancel. Returns `-inf` once the survival probability is exactly zero
    /// (only possible for the empirical variant at finite x).
    pub fn log_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            ResidualDistribution::UnitExponential => -x,
            ResidualDistribution::Gamma { shape, scale } => {
                special::ln_gamma_q(*shape, x / scale)
            }
            ResidualDistribution::TrapezoidExp { a, ell } => {
                let (p, c) = trapezoid_params(*a, *ell).expect("validated at construction");
                if x < *a {
                    (-((p * ell - c) / (2.0 * a) * x * x + c * x)).ln_1p()
                } else {
                    p.ln() - ell * (x - a)
                }
            }
            ResidualDistribution::Empirical { .. } => {
                let s = 1.0 - self.cdf(x);
                if s > 0.0 {
                    s.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Quantile function for `u` in [0, 1). For the empirical variant this
    /// is the order statistic at index `floor(u n)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!(
                "quantile requires 0 <= u < 1, got {u}"
            )));
        }
        Ok(match self {
            ResidualDistribution::UnitExponential => -(-u).ln_1p(),
            ResidualDistribution::Gamma { shape, scale } => {
                scale * special::inv_gamma_p(*shape, u)
            }
            ResidualDistribution::TrapezoidExp { a, ell } => {
                let (p, c) = trapezoid_params(*a, *ell).expect("validated at construction");
                if u <= 1.0 - p {
                    // Invert A x^2 + B x = u on the linear branch; the
                    // rationalized root is stable as A -> 0.
                    let aa = (p * ell - c) / (2.0 * a);
                    let b = c;
                    let disc = (b * b + 4.0 * aa * u).max(0.0);
                    2.0 * u / (b + disc.sqrt())
                } else {
                    a + (p / (1.0 - u)).ln() / ell
                }
            }
            ResidualDistribution::Empirical { samples } => {
                let n = samples.len();
                let idx = ((u * n as f64).floor() as usize).min(n - 1);
                samples[idx]
            }
        })
    }

    /// Draw one residual. The empirical variant resamples uniformly with
    /// replacement (bootstrap semantics).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ResidualDistribution::UnitExponential => rand_distr::Exp1.sample(rng),
            ResidualDistribution::Gamma { shape, scale } => {
                rand_distr::Gamma::new(*shape, *scale)
                    .expect("validated at construction")
                    .sample(rng)
            }
            ResidualDistribution::TrapezoidExp { .. } => {
                let u: f64 = rng.random();
                self.quantile(u).expect("u in [0, 1)")
            }
            ResidualDistribution::Empirical { samples } => {
                samples[rng.random_range(0..samples.len())]
            }
        }
    }

    /// Distribution mean. Model variants are unit-mean by construction; the
    /// empirical variant reports its pool average.
    pub fn mean(&self) -> f64 {
        match self {
            ResidualDistribution::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
            _ => 1.0,
        }
    }

    /// Whether the variant has a density (true for everything but the
    /// resampling pool), i.e. whether likelihood-based estimation applies.
    pub fn has_density(&self) -> bool {
        !matches!(self, ResidualDistribution::Empirical { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_pdf_at_zero_is_one() {
        let d = ResidualDistribution::unit_exponential();
        assert_eq!(d.pdf(0.0).unwrap(), 1.0);
    }

    #[test]
    fn exponential_cdf_at_ln2_is_half() {
        let d = ResidualDistribution::unit_exponential();
        assert!((d.cdf(2.0_f64.ln()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_requires_unit_mean() {
        assert!(ResidualDistribution::gamma(2.0, 0.5).is_ok());
        assert!(matches!(
            ResidualDistribution::gamma(2.0, 0.7),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ResidualDistribution::gamma(-1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_cdf_at_zero_is_zero() {
        let d = ResidualDistribution::gamma(2.0, 0.5).unwrap();
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.pdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn trapezoid_hand_computed_values() {
        // a = 1, ell = 2: p = 8/18, c = 2/9, pdf(0.5) = 5/9, F(a) = 1 - p.
        let (p, c) = trapezoid_params(1.0, 2.0).unwrap();
        assert!((p - 8.0 / 18.0).abs() < 1e-15);
        assert!((c - 2.0 / 9.0).abs() < 1e-15);
        let d = ResidualDistribution::trapezoid_exp(1.0, 2.0).unwrap();
        assert!((d.pdf(0.5).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert!((d.cdf(1.0) - 10.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_small_a_approaches_exponential() {
        // As a -> 0 with ell = 1 the tail weight p -> 1 and the law tends to
        // Exp(1).
        let d = ResidualDistribution::trapezoid_exp(1e-9, 1.0).unwrap();
        let (p, _) = trapezoid_params(1e-9, 1.0).unwrap();
        assert!((p - 1.0).abs() < 1e-8);
        assert!((d.pdf(1.0).unwrap() - (-1.0_f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn trapezoid_invalid_region_is_flagged() {
        // These values give p > 1 and hence c < 0: no valid density.
        match trapezoid_params(0.3053, 1.531) {
            Err(Error::InvalidTrapezoid { p, c }) => {
                assert!(p > 1.0, "p = {p}");
                assert!(c < 0.0, "c = {c}");
            }
            other => panic!("expected invalid trapezoid, got {other:?}"),
        }
        assert!(ResidualDistribution::trapezoid_exp(0.3053, 1.531).is_err());
    }

    #[test]
    fn empirical_singleton_always_resamples_itself() {
        let d = ResidualDistribution::empirical(vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..32 {
            assert_eq!(d.sample(&mut rng), 1.0);
        }
    }

    #[test]
    fn empirical_rejects_bad_pools() {
        assert!(ResidualDistribution::empirical(vec![]).is_err());
        assert!(ResidualDistribution::empirical(vec![1.0, 0.0]).is_err());
        assert!(ResidualDistribution::empirical(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn empirical_has_no_density() {
        let d = ResidualDistribution::empirical(vec![0.5, 1.5]).unwrap();
        assert!(matches!(d.pdf(1.0), Err(Error::NoDensity)));
        assert!(!d.has_density());
        // but the step CDF is defined
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(2.0), 1.0);
    }

    #[test]
    fn log_survival_matches_cdf_in_safe_range() {
        let dists = [
            ResidualDistribution::unit_exponential(),
            ResidualDistribution::gamma(2.0, 0.5).unwrap(),
            ResidualDistribution::trapezoid_exp(1.0, 2.0).unwrap(),
        ];
        for d in &dists {
            for x in [0.05, 0.5, 1.0, 2.5, 6.0] {
                let direct = (1.0 - d.cdf(x)).ln();
                assert!(
                    (d.log_survival(x) - direct).abs() < 1e-10,
                    "{} at x = {x}",
                    d.family_name()
                );
            }
        }
    }

    #[test]
    fn sample_mean_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let d = ResidualDistribution::unit_exponential();
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        // 3 sigma = 3 / sqrt(n) with unit variance
        assert!((mean - 1.0).abs() < 0.02, "mean = {mean}");
    }

    #[test]
    fn gamma_sample_variance_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let d = ResidualDistribution::gamma(2.0, 0.5).unwrap();
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Var = shape * scale^2 = 0.5
        assert!((var - 0.5).abs() < 0.03, "var = {var}");
    }
}
