//! Parameter estimation: joint maximum likelihood over excitation and
//! residual parameters, exponential quasi-MLE, two-step GMM, and numerical
//! standard errors.
//!
//! All fits run Nelder-Mead in unconstrained transformed coordinates:
//! positive parameters through logs and the univariate stability constraint
//! hard-coded via `beta = alpha + e^x`. The multivariate stability gate
//! (spectral radius of `alpha[i][j]/beta[i]` below 1) and the
//! trapezoid-exponential validity region enter as smooth penalties instead,
//! since neither has a clean coordinate transform.

mod nelder_mead;
mod numdiff;

pub use nelder_mead::{minimize, NelderMeadOptions, OptimOutcome};
pub use numdiff::{gradient, hessian, jacobian};

use crate::error::{Error, Result};
use crate::multivariate::{self, MvExcitationParams};
use crate::residuals::{trapezoid_params, ResidualDistribution};
use crate::series::EventSeries;
use crate::univariate::{self, ExcitationParams};
use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Residual family whose parameters are estimated jointly with the
/// excitation parameters. The empirical variant has no density and is not a
/// likelihood family; GMM or FHS cover that workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualFamily {
    Exponential,
    Gamma,
    TrapezoidExp,
}

impl ResidualFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ResidualFamily::Exponential => "exponential",
            ResidualFamily::Gamma => "gamma",
            ResidualFamily::TrapezoidExp => "trapezoid_exp",
        }
    }

    fn n_params(&self) -> usize {
        match self {
            ResidualFamily::Exponential => 0,
            ResidualFamily::Gamma => 1,
            ResidualFamily::TrapezoidExp => 2,
        }
    }

    fn param_names(&self) -> &'static [&'static str] {
        match self {
            ResidualFamily::Exponential => &[],
            ResidualFamily::Gamma => &["shape"],
            ResidualFamily::TrapezoidExp => &["a", "ell"],
        }
    }

    /// Starting point in log coordinates, at the family's
    /// exponential-equivalent member.
    fn default_log_init(&self) -> Vec<f64> {
        match self {
            ResidualFamily::Exponential => vec![],
            ResidualFamily::Gamma => vec![0.0], // shape 1
            // small knot, unit tail rate: close to Exp(1) and valid
            ResidualFamily::TrapezoidExp => vec![(0.05_f64).ln(), 0.0],
        }
    }

    /// Build the distribution from raw (not log) family parameters, or
    /// report how far outside the valid region they are.
    fn dist_from_raw(&self, raw: &[f64]) -> std::result::Result<ResidualDistribution, f64> {
        match self {
            ResidualFamily::Exponential => Ok(ResidualDistribution::UnitExponential),
            ResidualFamily::Gamma => {
                ResidualDistribution::gamma_with_unit_mean(raw[0]).map_err(|_| 1.0)
            }
            ResidualFamily::TrapezoidExp => match trapezoid_params(raw[0], raw[1]) {
                Ok(_) => Ok(ResidualDistribution::TrapezoidExp { a: raw[0], ell: raw[1] }),
                Err(Error::InvalidTrapezoid { p, c }) => {
                    Err((p - 1.0).max(0.0) + (-p).max(0.0) + (-c).max(0.0))
                }
                Err(_) => Err(1.0),
            },
        }
    }
}

/// Knobs shared by all fits.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Soft lower bound on the number of events.
    pub min_events: usize,
    /// Initial intensity state for inference; defaults to the current
    /// iterate's baseline.
    pub lambda0: Option<f64>,
    /// Enforce `alpha11 = alpha22`, `alpha12 = alpha21` in bivariate fits.
    pub symmetric: bool,
    /// Named overrides of the default starting point.
    pub init: Option<BTreeMap<String, f64>>,
    pub nm: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            min_events: 100,
            lambda0: None,
            symmetric: false,
            init: None,
            nm: NelderMeadOptions::default(),
        }
    }
}

/// Estimation result: named estimates and standard errors, the objective at
/// the optimum, and the residuals inferred at it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub family: String,
    pub symmetric: bool,
    pub estimates: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    /// Log-likelihood at the optimum; for GMM fits, the negated criterion.
    #[serde(rename = "loglik")]
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_events: usize,
    pub lambda0: Option<f64>,
    pub warnings: Vec<String>,
    /// Residual sequences at the optimum, one per event type.
    #[serde(skip)]
    pub residuals: Vec<Vec<f64>>,
}

impl FitReport {
    pub fn excitation_params(&self) -> Result<ExcitationParams> {
        ExcitationParams::new(
            self.estimates["mu"],
            self.estimates["alpha"],
            self.estimates["beta"],
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_series(series: &EventSeries, min_events: usize) -> Result<()> {
    if series.len() < min_events {
        return Err(Error::InsufficientData { got: series.len(), need: min_events });
    }
    Ok(())
}

// Univariate transform: x = [ln mu, ln alpha, ln(beta - alpha)], which makes
// 0 < alpha < beta automatic.
fn unpack_hawkes(x: &[f64]) -> ExcitationParams {
    let mu = x[0].exp();
    let alpha = x[1].exp();
    let beta = alpha + x[2].exp();
    ExcitationParams { mu, alpha, beta }
}

fn pack_hawkes(mu: f64, alpha: f64, beta: f64) -> [f64; 3] {
    [mu.ln(), alpha.ln(), (beta - alpha).ln()]
}

/// Default starting point: baseline at the observed rate, decay at twice
/// the rate, jump at half the decay.
fn default_hawkes_init(series: &EventSeries) -> [f64; 3] {
    let t_end = series.times().last().copied().unwrap_or(1.0).max(1e-9);
    let rate = series.len() as f64 / t_end;
    let beta0 = 2.0 * rate;
    pack_hawkes(rate, 0.5 * beta0, beta0)
}

fn apply_init_overrides(
    x0: &mut [f64],
    names: &[&str],
    init: Option<&BTreeMap<String, f64>>,
    to_log: impl Fn(usize, f64) -> f64,
) {
    if let Some(map) = init {
        for (i, name) in names.iter().enumerate() {
            if let Some(&v) = map.get(*name) {
                x0[i] = to_log(i, v);
            }
        }
    }
}

/// Joint MLE of the univariate model: excitation parameters plus the
/// residual family's shape parameters.
pub fn mle_fit(
    series: &EventSeries,
    family: ResidualFamily,
    opts: &FitOptions,
) -> Result<FitReport> {
    check_series(series, opts.min_events)?;
    if series.num_types() > 1 {
        return Err(Error::InvalidSeries(
            "univariate fit requires a single event type".into(),
        ));
    }
    let nf = family.n_params();
    let mut x0 = Vec::with_capacity(3 + nf);
    x0.extend_from_slice(&default_hawkes_init(series));
    x0.extend_from_slice(&family.default_log_init());
    if let Some(init) = &opts.init {
        let mut hawkes_raw = [x0[0].exp(), x0[1].exp(), x0[1].exp() + x0[2].exp()];
        for (i, name) in ["mu", "alpha", "beta"].iter().enumerate() {
            if let Some(&v) = init.get(*name) {
                hawkes_raw[i] = v;
            }
        }
        x0[..3].copy_from_slice(&pack_hawkes(hawkes_raw[0], hawkes_raw[1], hawkes_raw[2]));
        apply_init_overrides(&mut x0[3..], family.param_names(), Some(init), |_, v| v.ln());
    }
    let lambda0 = opts.lambda0;
    let objective = |x: &[f64]| -> f64 {
        let params = unpack_hawkes(x);
        let raw: Vec<f64> = x[3..].iter().map(|v| v.exp()).collect();
        match family.dist_from_raw(&raw) {
            Ok(dist) => {
                let l0 = lambda0.unwrap_or(params.mu).max(params.mu);
                match univariate::loglik(series, &params, &dist, l0) {
                    Ok(ll) => -ll,
                    Err(_) => f64::INFINITY,
                }
            }
            Err(violation) => 1e12 * (1.0 + violation),
        }
    };
    let scale = vec![0.25; x0.len()];
    let out = minimize(objective, &x0, &scale, &opts.nm);

    let params = unpack_hawkes(&out.x);
    let raw_family: Vec<f64> = out.x[3..].iter().map(|v| v.exp()).collect();
    let dist = family
        .dist_from_raw(&raw_family)
        .map_err(|_| Error::Numerical("optimizer returned invalid residual parameters".into()))?;
    let l0 = lambda0.unwrap_or(params.mu).max(params.mu);
    let (residuals, _) = univariate::infer_residuals(series, &params, l0)?;

    let mut estimates = BTreeMap::new();
    estimates.insert("mu".into(), params.mu);
    estimates.insert("alpha".into(), params.alpha);
    estimates.insert("beta".into(), params.beta);
    for (name, value) in family.param_names().iter().zip(&raw_family) {
        estimates.insert((*name).into(), *value);
    }
    let mut report = FitReport {
        model: "univariate".into(),
        family: family.name().into(),
        symmetric: false,
        estimates,
        std_errors: BTreeMap::new(),
        objective: -out.f,
        converged: out.converged,
        iterations: out.iterations,
        n_events: series.len(),
        lambda0,
        warnings: Vec::new(),
        residuals: vec![residuals],
    };
    let _ = dist; // consumed above for validation only
    fill_hessian_std_errors(series, &mut report);
    Ok(report)
}

/// Exponential quasi-MLE: the Hawkes likelihood regardless of the true
/// residual law. Identical objective to [`mle_fit`] with the exponential
/// family.
pub fn qmle_exp_fit(series: &EventSeries, opts: &FitOptions) -> Result<FitReport> {
    mle_fit(series, ResidualFamily::Exponential, opts)
}

// Layout of the multivariate coordinate vector:
//   [ln mu_i; m] ++ [ln beta_i; m] ++ alpha block ++ [family params; m * nf]
// where the alpha block is [ln a_self, ln a_cross] under the symmetric
// bivariate constraint and all m^2 entries (row-major) otherwise.
struct MvLayout {
    m: usize,
    symmetric: bool,
    family: ResidualFamily,
}

impl MvLayout {
    fn n_alpha(&self) -> usize {
        if self.symmetric {
            2
        } else {
            self.m * self.m
        }
    }

    fn len(&self) -> usize {
        2 * self.m + self.n_alpha() + self.m * self.family.n_params()
    }

    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
        let m = self.m;
        let mu: Vec<f64> = x[..m].iter().map(|v| v.exp()).collect();
        let beta: Vec<f64> = x[m..2 * m].iter().map(|v| v.exp()).collect();
        let a = &x[2 * m..2 * m + self.n_alpha()];
        let alpha: Vec<Vec<f64>> = if self.symmetric {
            let (s, c) = (a[0].exp(), a[1].exp());
            vec![vec![s, c], vec![c, s]]
        } else {
            (0..m)
                .map(|i| (0..m).map(|j| a[i * m + j].exp()).collect())
                .collect()
        };
        let fam_raw: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let nf = self.family.n_params();
                let off = 2 * m + self.n_alpha() + i * nf;
                x[off..off + nf].iter().map(|v| v.exp()).collect()
            })
            .collect();
        (mu, alpha, beta, fam_raw)
    }
}

fn spectral_radius_of(alpha: &[Vec<f64>], beta: &[f64]) -> f64 {
    let m = beta.len();
    let mut v = vec![1.0; m];
    let mut rho = 0.0;
    for _ in 0..200 {
        let mut w = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                w[i] += alpha[i][j] / beta[i] * v[j];
            }
        }
        let norm = w.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
        if norm == 0.0 {
            return 0.0;
        }
        for x in &mut w {
            *x /= norm;
        }
        if (norm - rho).abs() < 1e-12 * norm.max(1.0) {
            return norm;
        }
        rho = norm;
        v = w;
    }
    rho
}

/// Joint MLE of the m-type model from a typed series. The residual family
/// is shared across types with per-type parameters.
pub fn mle_fit_mv(
    series: &EventSeries,
    family: ResidualFamily,
    opts: &FitOptions,
) -> Result<FitReport> {
    check_series(series, opts.min_events)?;
    let m = series.num_types();
    if m < 1 {
        return Err(Error::InvalidSeries("series has no events".into()));
    }
    if opts.symmetric && m != 2 {
        return Err(Error::InvalidParameter(
            "the symmetric alpha constraint applies to bivariate fits".into(),
        ));
    }
    let layout = MvLayout { m, symmetric: opts.symmetric, family };

    let t_end = series.times().last().copied().unwrap_or(1.0).max(1e-9);
    let mut counts = vec![0usize; m];
    for &z in series.types() {
        counts[z as usize] += 1;
    }
    let total_rate = series.len() as f64 / t_end;
    let mut x0 = Vec::with_capacity(layout.len());
    for i in 0..m {
        x0.push((counts[i].max(1) as f64 / t_end).ln()); // mu_i
    }
    for _ in 0..m {
        x0.push((2.0 * total_rate).ln()); // beta_i
    }
    for _ in 0..layout.n_alpha() {
        x0.push((total_rate / m as f64).ln()); // row branching ~ 0.5
    }
    for _ in 0..m {
        x0.extend_from_slice(&family.default_log_init());
    }
    if let Some(init) = &opts.init {
        let names = mv_param_names(&layout);
        for (i, name) in names.iter().enumerate() {
            if let Some(&v) = init.get(name) {
                x0[i] = v.ln();
            }
        }
    }

    let lambda0 = opts.lambda0;
    let objective = |x: &[f64]| -> f64 {
        let (mu, alpha, beta, fam_raw) = layout.unpack(x);
        let rho = spectral_radius_of(&alpha, &beta);
        if rho >= 0.995 {
            return 1e12 * (1.0 + rho);
        }
        let mut dists = Vec::with_capacity(m);
        for raw in &fam_raw {
            match family.dist_from_raw(raw) {
                Ok(d) => dists.push(d),
                Err(violation) => return 1e12 * (1.0 + violation),
            }
        }
        let params = match MvExcitationParams::new(mu, alpha, beta) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        let l0: Vec<f64> = params
            .mu
            .iter()
            .map(|&mu_i| lambda0.unwrap_or(mu_i).max(mu_i))
            .collect();
        match multivariate::loglik_mv(series, &params, &dists, &l0) {
            Ok(ll) => -ll,
            Err(_) => f64::INFINITY,
        }
    };
    let scale = vec![0.25; x0.len()];
    let out = minimize(objective, &x0, &scale, &opts.nm);

    let (mu, alpha, beta, fam_raw) = layout.unpack(&out.x);
    let params = MvExcitationParams::new(mu, alpha, beta)
        .map_err(|e| Error::Numerical(format!("optimizer returned invalid parameters: {e}")))?;
    let l0: Vec<f64> = params
        .mu
        .iter()
        .map(|&mu_i| lambda0.unwrap_or(mu_i).max(mu_i))
        .collect();
    let (residuals, _) = multivariate::infer_residuals_mv(series, &params, &l0)?;

    let mut estimates = BTreeMap::new();
    for i in 0..m {
        estimates.insert(format!("mu{i}"), params.mu[i]);
        estimates.insert(format!("beta{i}"), params.beta[i]);
        for j in 0..m {
            estimates.insert(format!("alpha{i}{j}"), params.alpha[i][j]);
        }
        for (k, name) in family.param_names().iter().enumerate() {
            estimates.insert(format!("{name}{i}"), fam_raw[i][k]);
        }
    }
    let mut report = FitReport {
        model: "multivariate".into(),
        family: family.name().into(),
        symmetric: opts.symmetric,
        estimates,
        std_errors: BTreeMap::new(),
        objective: -out.f,
        converged: out.converged,
        iterations: out.iterations,
        n_events: series.len(),
        lambda0,
        warnings: Vec::new(),
        residuals,
    };
    fill_hessian_std_errors(series, &mut report);
    Ok(report)
}

/// Multivariate exponential quasi-MLE.
pub fn qmle_exp_fit_mv(series: &EventSeries, opts: &FitOptions) -> Result<FitReport> {
    mle_fit_mv(series, ResidualFamily::Exponential, opts)
}

fn mv_param_names(layout: &MvLayout) -> Vec<String> {
    let m = layout.m;
    let mut names = Vec::with_capacity(layout.len());
    for i in 0..m {
        names.push(format!("mu{i}"));
    }
    for i in 0..m {
        names.push(format!("beta{i}"));
    }
    if layout.symmetric {
        names.push("alpha00".into());
        names.push("alpha01".into());
    } else {
        for i in 0..m {
            for j in 0..m {
                names.push(format!("alpha{i}{j}"));
            }
        }
    }
    for i in 0..m {
        for name in layout.family.param_names() {
            names.push(format!("{name}{i}"));
        }
    }
    names
}

/// GMM specification: which weighting scheme the quadratic form uses. The
/// moment set is the lagged triple `(eps, lambda, tau) x (eps_n - 1)`,
/// three conditions for the three excitation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GmmSpec {
    pub weight_stage: WeightStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightStage {
    Identity,
    #[default]
    TwoStep,
}

/// Sample moment vectors `g_n` at the given parameters, n = 2..N.
fn gmm_moment_sample(
    series: &EventSeries,
    params: &ExcitationParams,
    lambda0: Option<f64>,
) -> Result<Vec<Vector3<f64>>> {
    let l0 = lambda0.unwrap_or(params.mu).max(params.mu);
    let (res, path) = univariate::infer_residuals(series, params, l0)?;
    let taus = series.inter_arrivals();
    let mut out = Vec::with_capacity(res.len().saturating_sub(1));
    for i in 0..res.len().saturating_sub(1) {
        let centered = res[i + 1] - 1.0;
        out.push(Vector3::new(
            res[i] * centered,
            path.values[i] * centered,
            taus[i] * centered,
        ));
    }
    Ok(out)
}

fn moment_mean(gs: &[Vector3<f64>]) -> Vector3<f64> {
    let mut sum = Vector3::zeros();
    for g in gs {
        sum += g;
    }
    sum / gs.len() as f64
}

fn moment_covariance(gs: &[Vector3<f64>]) -> Matrix3<f64> {
    let mean = moment_mean(gs);
    let mut cov = Matrix3::zeros();
    for g in gs {
        let d = g - mean;
        cov += d * d.transpose();
    }
    cov / (gs.len() as f64 - 1.0)
}

/// Two-step GMM for the univariate excitation parameters. Distribution-free
/// on the residual law beyond its unit mean: no residual-family parameters
/// are estimated.
pub fn gmm_fit(series: &EventSeries, spec: &GmmSpec, opts: &FitOptions) -> Result<FitReport> {
    check_series(series, opts.min_events)?;
    if series.num_types() > 1 {
        return Err(Error::InvalidSeries("GMM requires a univariate series".into()));
    }
    let lambda0 = opts.lambda0;
    let criterion = |x: &[f64], w: &Matrix3<f64>| -> f64 {
        let params = unpack_hawkes(x);
        match gmm_moment_sample(series, &params, lambda0) {
            Ok(gs) if gs.len() >= 3 => {
                let gbar = moment_mean(&gs);
                (gbar.transpose() * w * gbar)[(0, 0)]
            }
            _ => f64::INFINITY,
        }
    };

    let mut x0 = default_hawkes_init(series).to_vec();
    if let Some(init) = &opts.init {
        let mut raw = [x0[0].exp(), x0[1].exp(), x0[1].exp() + x0[2].exp()];
        for (i, name) in ["mu", "alpha", "beta"].iter().enumerate() {
            if let Some(&v) = init.get(*name) {
                raw[i] = v;
            }
        }
        x0 = pack_hawkes(raw[0], raw[1], raw[2]).to_vec();
    }
    let scale = vec![0.25; 3];
    let identity = Matrix3::identity();
    let stage1 = minimize(|x| criterion(x, &identity), &x0, &scale, &opts.nm);

    let mut warnings = Vec::new();
    let (weight, out) = match spec.weight_stage {
        WeightStage::Identity => (identity, stage1),
        WeightStage::TwoStep => {
            let params1 = unpack_hawkes(&stage1.x);
            let gs = gmm_moment_sample(series, &params1, lambda0)?;
            let omega = moment_covariance(&gs);
            let w2 = match omega.try_inverse().filter(|w| w.iter().all(|v| v.is_finite())) {
                Some(w) => w,
                None => {
                    let ridge = 1e-8 * omega.trace() / 3.0;
                    warnings.push(format!(
                        "moment covariance near-singular; ridge {ridge:.3e} applied"
                    ));
                    (omega + Matrix3::identity() * ridge)
                        .try_inverse()
                        .ok_or_else(|| {
                            Error::Numerical("moment covariance not invertible".into())
                        })?
                }
            };
            let stage2 = minimize(|x| criterion(x, &w2), &stage1.x, &scale, &opts.nm);
            (w2, stage2)
        }
    };

    let params = unpack_hawkes(&out.x);
    let l0 = lambda0.unwrap_or(params.mu).max(params.mu);
    let (residuals, _) = univariate::infer_residuals(series, &params, l0)?;

    let mut estimates = BTreeMap::new();
    estimates.insert("mu".into(), params.mu);
    estimates.insert("alpha".into(), params.alpha);
    estimates.insert("beta".into(), params.beta);

    let std_errors = gmm_sandwich_errors(series, &params, &weight, lambda0)
        .unwrap_or_else(|e| {
            warnings.push(format!("sandwich standard errors failed: {e}"));
            BTreeMap::new()
        });

    Ok(FitReport {
        model: "univariate".into(),
        family: "none".into(),
        symmetric: false,
        estimates,
        std_errors,
        objective: -out.f,
        converged: out.converged,
        iterations: out.iterations,
        n_events: series.len(),
        lambda0,
        warnings,
        residuals: vec![residuals],
    })
}

fn gmm_sandwich_errors(
    series: &EventSeries,
    params: &ExcitationParams,
    weight: &Matrix3<f64>,
    lambda0: Option<f64>,
) -> Result<BTreeMap<String, f64>> {
    let raw = [params.mu, params.alpha, params.beta];
    let gbar_of = |x: &[f64]| -> Vec<f64> {
        match ExcitationParams::new(x[0], x[1], x[2])
            .and_then(|p| gmm_moment_sample(series, &p, lambda0))
        {
            Ok(gs) => {
                let m = moment_mean(&gs);
                vec![m[0], m[1], m[2]]
            }
            Err(_) => vec![f64::NAN; 3],
        }
    };
    let jac = numdiff::jacobian(gbar_of, &raw, 3, 1e-5);
    let mut g = Matrix3::zeros();
    for (k, row) in jac.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            g[(k, i)] = v;
        }
    }
    let gs = gmm_moment_sample(series, params, lambda0)?;
    let omega = moment_covariance(&gs);
    let n = gs.len() as f64;
    let bread = (g.transpose() * weight * g)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("GMM bread matrix is singular".into()))?;
    let filling = g.transpose() * weight * omega * weight * g;
    let cov = bread * filling * bread / n;
    let names = ["mu", "alpha", "beta"];
    let mut out = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let v = cov[(i, i)];
        out.insert((*name).into(), if v >= 0.0 { v.sqrt() } else { f64::NAN });
    }
    Ok(out)
}

/// How standard errors are computed from a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMethod {
    /// Square roots of the diagonal of the inverse negative Hessian of the
    /// log-likelihood at the estimates.
    Hessian,
    /// The GMM sandwich `(G'WG)^{-1} G'W Omega WG (G'WG)^{-1} / N`.
    GmmSandwich,
}

/// Standard errors for a finished fit. `Hessian` applies to likelihood
/// reports, `GmmSandwich` to GMM reports (using the efficient two-step
/// weight recomputed at the estimates).
pub fn std_errors(
    series: &EventSeries,
    report: &FitReport,
    method: SeMethod,
) -> Result<BTreeMap<String, f64>> {
    match method {
        SeMethod::Hessian => {
            let (names, f) = loglik_by_names(series, report)?;
            let x: Vec<f64> = names.iter().map(|n| report.estimates[n]).collect();
            let (ses, ok) = hessian_standard_errors(f, &x);
            let mut out = BTreeMap::new();
            for (name, se) in names.iter().zip(ses) {
                out.insert(name.clone(), se);
            }
            if !ok {
                // mirror the per-parameter NaN convention
                for v in out.values_mut() {
                    if !v.is_finite() {
                        *v = f64::NAN;
                    }
                }
            }
            Ok(expand_symmetric(report, out))
        }
        SeMethod::GmmSandwich => {
            let params = report.excitation_params()?;
            let gs = gmm_moment_sample(series, &params, report.lambda0)?;
            let omega = moment_covariance(&gs);
            let weight = omega
                .try_inverse()
                .unwrap_or_else(|| Matrix3::identity());
            gmm_sandwich_errors(series, &params, &weight, report.lambda0)
        }
    }
}

/// SEs from the inverse negative numerical Hessian; the flag is false when
/// the Hessian is not positive definite (entries come back NaN).
pub fn hessian_standard_errors<F: FnMut(&[f64]) -> f64>(f: F, x: &[f64]) -> (Vec<f64>, bool) {
    let h = numdiff::hessian(f, x, 1e-4);
    let n = x.len();
    let neg = DMatrix::from_fn(n, n, |i, j| -h[i][j]);
    match neg.clone().cholesky() {
        Some(chol) => {
            let inv = chol.solve(&DMatrix::identity(n, n));
            let ses: Vec<f64> = (0..n).map(|i| inv[(i, i)].max(0.0).sqrt()).collect();
            (ses, true)
        }
        None => (vec![f64::NAN; n], false),
    }
}

// The free parameters of a fit, alphabetical by name, and the log-likelihood
// as a function of their raw values. Symmetric bivariate fits expose only
// the two free alphas (alpha00, alpha01).
#[allow(clippy::type_complexity)]
fn loglik_by_names<'a>(
    series: &'a EventSeries,
    report: &'a FitReport,
) -> Result<(Vec<String>, Box<dyn FnMut(&[f64]) -> f64 + 'a>)> {
    let family = match report.family.as_str() {
        "exponential" | "none" => ResidualFamily::Exponential,
        "gamma" => ResidualFamily::Gamma,
        "trapezoid_exp" => ResidualFamily::TrapezoidExp,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown residual family in report: {other}"
            )))
        }
    };
    let lambda0 = report.lambda0;
    if report.model == "univariate" {
        let mut names: Vec<String> = vec!["alpha".into(), "beta".into(), "mu".into()];
        for n in family.param_names() {
            names.push((*n).to_string());
        }
        names.sort();
        let names_cl = names.clone();
        let f = move |x: &[f64]| -> f64 {
            let by_name: BTreeMap<&str, f64> = names_cl
                .iter()
                .map(String::as_str)
                .zip(x.iter().copied())
                .collect();
            let Ok(params) = ExcitationParams::new(by_name["mu"], by_name["alpha"], by_name["beta"])
            else {
                return f64::NEG_INFINITY;
            };
            let fam_raw: Vec<f64> = family
                .param_names()
                .iter()
                .map(|n| by_name[*n])
                .collect();
            let Ok(dist) = family.dist_from_raw(&fam_raw) else {
                return f64::NEG_INFINITY;
            };
            let l0 = lambda0.unwrap_or(params.mu).max(params.mu);
            univariate::loglik(series, &params, &dist, l0).unwrap_or(f64::NEG_INFINITY)
        };
        Ok((names, Box::new(f)))
    } else {
        let m = series.num_types();
        let layout = MvLayout { m, symmetric: report.symmetric, family };
        let mut names = mv_param_names(&layout);
        names.sort();
        let names_cl = names.clone();
        let f = move |x: &[f64]| -> f64 {
            let by_name: BTreeMap<&str, f64> = names_cl
                .iter()
                .map(String::as_str)
                .zip(x.iter().copied())
                .collect();
            let mu: Vec<f64> = (0..m).map(|i| by_name[format!("mu{i}").as_str()]).collect();
            let beta: Vec<f64> = (0..m).map(|i| by_name[format!("beta{i}").as_str()]).collect();
            let alpha: Vec<Vec<f64>> = if layout.symmetric {
                let s = by_name["alpha00"];
                let c = by_name["alpha01"];
                vec![vec![s, c], vec![c, s]]
            } else {
                (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| by_name[format!("alpha{i}{j}").as_str()])
                            .collect()
                    })
                    .collect()
            };
            let mut dists = Vec::with_capacity(m);
            for i in 0..m {
                let raw: Vec<f64> = family
                    .param_names()
                    .iter()
                    .map(|n| by_name[format!("{n}{i}").as_str()])
                    .collect();
                match family.dist_from_raw(&raw) {
                    Ok(d) => dists.push(d),
                    Err(_) => return f64::NEG_INFINITY,
                }
            }
            let Ok(params) = MvExcitationParams::new(mu, alpha, beta) else {
                return f64::NEG_INFINITY;
            };
            let l0: Vec<f64> = params
                .mu
                .iter()
                .map(|&mu_i| lambda0.unwrap_or(mu_i).max(mu_i))
                .collect();
            multivariate::loglik_mv(series, &params, &dists, &l0).unwrap_or(f64::NEG_INFINITY)
        };
        Ok((names, Box::new(f)))
    }
}

// Symmetric fits estimate alpha00/alpha01 only; mirror their SEs onto the
// tied entries so the report covers every estimates key.
fn expand_symmetric(report: &FitReport, mut ses: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    if report.symmetric {
        if let Some(&s) = ses.get("alpha00") {
            ses.insert("alpha11".into(), s);
        }
        if let Some(&c) = ses.get("alpha01") {
            ses.insert("alpha10".into(), c);
        }
    }
    ses
}

fn fill_hessian_std_errors(series: &EventSeries, report: &mut FitReport) {
    match std_errors(series, report, SeMethod::Hessian) {
        Ok(ses) => {
            if ses.values().any(|v| !v.is_finite()) {
                report
                    .warnings
                    .push("Hessian not positive definite; some standard errors are NaN".into());
            }
            report.std_errors = ses;
        }
        Err(e) => report.warnings.push(format!("standard errors failed: {e}")),
    }
}

/// An independently seeded stream per path index, for deterministic parallel
/// simulation fan-out.
pub fn derive_seeds<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.random()).collect()
}
