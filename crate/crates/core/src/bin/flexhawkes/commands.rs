//! Implementations of the CLI subcommands: each resolves its parameters,
//! runs the pipeline, and writes CSV/JSON artifacts plus a run manifest.

use crate::config::{ensure_out_dir, Resolver};
use crate::{
    EstimateCmd, FhsCmd, ResidualsCmd, SimulateCmd, SparsifyCmd, VolatilityCmd,
};
use flexhawkes::estimate::{
    self, FitOptions, FitReport, GmmSpec, ResidualFamily, WeightStage,
};
use flexhawkes::marketdata::{midprice_events, sparsify, PriceEventSeries, QuoteSeries};
use flexhawkes::multivariate::{self, MvExcitationParams};
use flexhawkes::series::write_residuals_csv;
use flexhawkes::volatility::{self, MarkMoments, MomentInterpretation};
use flexhawkes::{
    diagnostics, univariate, Error, EventSeries, ExcitationParams, ResidualDistribution, Result,
    StoppingRule,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// Parse a residual distribution spec: `exp`, `gamma:SHAPE`,
/// `trapezoid:A,ELL`, or `empirical:CSVPATH`.
pub fn parse_residual_spec(s: &str) -> Result<ResidualDistribution> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    match (kind, rest) {
        ("exp", None) | ("exponential", None) => Ok(ResidualDistribution::unit_exponential()),
        ("gamma", Some(arg)) => {
            let shape: f64 = arg
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad gamma shape: {arg}")))?;
            ResidualDistribution::gamma_with_unit_mean(shape)
        }
        ("trapezoid", Some(arg)) => {
            let parts: Vec<&str> = arg.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "trapezoid spec needs a,ell, got {arg}"
                )));
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("bad trapezoid a: {}", parts[0]))
            })?;
            let ell: f64 = parts[1].trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("bad trapezoid ell: {}", parts[1]))
            })?;
            ResidualDistribution::trapezoid_exp(a, ell)
        }
        ("empirical", Some(path)) => {
            let samples = flexhawkes::series::read_residuals_csv(path.trim())?;
            ResidualDistribution::empirical(samples)
        }
        _ => Err(Error::InvalidParameter(format!(
            "unknown residual spec: {s} (expected exp | gamma:SHAPE | trapezoid:A,ELL | empirical:PATH)"
        ))),
    }
}

/// One spec for all types, or `;`-separated per-type specs.
fn parse_residual_specs(s: &str, m: usize) -> Result<Vec<ResidualDistribution>> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() == 1 {
        let d = parse_residual_spec(parts[0])?;
        return Ok(vec![d; m]);
    }
    if parts.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{} residual specs for {m} types",
            parts.len()
        )));
    }
    parts.iter().map(|p| parse_residual_spec(p)).collect()
}

fn read_mv_params(path: &Path) -> Result<MvExcitationParams> {
    let text = std::fs::read_to_string(path)?;
    let raw: MvExcitationParams = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    // revalidate: deserialization bypasses the constructor
    MvExcitationParams::new(raw.mu, raw.alpha, raw.beta)
}

fn family_from_str(s: &str) -> Result<ResidualFamily> {
    match s {
        "exp" | "exponential" => Ok(ResidualFamily::Exponential),
        "gamma" => Ok(ResidualFamily::Gamma),
        "trapezoid" | "trapezoid_exp" => Ok(ResidualFamily::TrapezoidExp),
        other => Err(Error::InvalidParameter(format!(
            "unknown family: {other} (expected exp | gamma | trapezoid)"
        ))),
    }
}

/// Linear-interpolation empirical quantile of unsorted data.
fn empirical_quantile(data: &[f64], q: f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn write_histogram(path: &Path, data: &[f64], n_bins: usize) -> Result<()> {
    let (edges, counts) = diagnostics::histogram(data, n_bins)?;
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    w.write_record(["bin_lo", "bin_hi", "count"])
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    for i in 0..counts.len() {
        w.write_record([
            format!("{}", edges[i]),
            format!("{}", edges[i + 1]),
            counts[i].to_string(),
        ])
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

fn write_qq(path: &Path, data: &[f64], reference: &ResidualDistribution) -> Result<()> {
    let pairs = diagnostics::qq_pairs(data, reference)?;
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    w.write_record(["theoretical", "empirical"])
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    for (t, e) in pairs {
        w.write_record([format!("{t}"), format!("{e}")])
            .map_err(|er| Error::Csv { path: path.display().to_string(), msg: er.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

fn write_lambda_columns(path: &Path, paths: &[flexhawkes::LambdaPath]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    let header: Vec<String> = (0..paths.len()).map(|i| format!("lambda_{i}")).collect();
    w.write_record(&header)
        .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    let n = paths.first().map_or(0, |p| p.values.len());
    for row in 0..n {
        let rec: Vec<String> = paths.iter().map(|p| format!("{}", p.values[row])).collect();
        w.write_record(&rec)
            .map_err(|e| Error::Csv { path: path.display().to_string(), msg: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_simulate(cmd: SimulateCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let seed = r.require("seed", cmd.common.seed)?;
    let model = r.get_or("model", cmd.model, "flex".into())?;
    if model != "flex" && model != "hawkes" {
        return Err(Error::InvalidParameter(format!(
            "model must be flex or hawkes, got {model}"
        )));
    }
    let n_events = r.get_opt("n-events", cmd.n_events)?;
    let horizon = r.get_opt("horizon", cmd.horizon)?;
    let stop = match (n_events, horizon) {
        (Some(n), None) => StoppingRule::Events(n),
        (None, Some(h)) => StoppingRule::Horizon(h),
        _ => {
            return Err(Error::InvalidParameter(
                "exactly one of n-events and horizon is required".into(),
            ))
        }
    };
    let residual_spec = if model == "hawkes" {
        r.get_or("residual", Some("exp".into()), "exp".into())?
    } else {
        r.get_or("residual", cmd.residual, "exp".into())?
    };
    let params_file = r.get_opt::<String>("params-file", cmd.params_file)?;

    if let Some(pf) = params_file {
        // multivariate
        let params = read_mv_params(Path::new(&pf))?;
        let m = params.dim();
        let dists = parse_residual_specs(&residual_spec, m)?;
        let lambda0_flag = r.get_opt("lambda0", cmd.lambda0)?;
        let lambda0: Vec<f64> = params
            .mu
            .iter()
            .map(|&mu| lambda0_flag.unwrap_or(mu))
            .collect();
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let mut rngs: Vec<ChaCha8Rng> = (0..m)
            .map(|_| ChaCha8Rng::seed_from_u64(master.random()))
            .collect();
        let (series, lambda) = multivariate::simulate_mv(&params, &dists, &lambda0, stop, &mut rngs)?;
        series.write_csv(out_dir.join("events.csv"))?;
        write_lambda_columns(&out_dir.join("lambda.csv"), &lambda)?;
    } else {
        let mu = r.require("mu", cmd.mu)?;
        let alpha = r.require("alpha", cmd.alpha)?;
        let beta = r.require("beta", cmd.beta)?;
        let params = ExcitationParams::new(mu, alpha, beta)?;
        let dist = parse_residual_spec(&residual_spec)?;
        let lambda0 = r.get_or("lambda0", cmd.lambda0, mu)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (series, lambda) = univariate::simulate(&params, &dist, lambda0, stop, &mut rng)?;
        series.write_csv(out_dir.join("events.csv"))?;
        lambda.write_csv(out_dir.join("lambda.csv"))?;
    }
    r.write_manifest(&out_dir, "simulate")
}

fn reference_dist(report: &FitReport, type_idx: usize, multivariate: bool) -> ResidualDistribution {
    let key = |base: &str| {
        if multivariate {
            format!("{base}{type_idx}")
        } else {
            base.to_string()
        }
    };
    match report.family.as_str() {
        "gamma" => report
            .estimates
            .get(&key("shape"))
            .and_then(|&s| ResidualDistribution::gamma_with_unit_mean(s).ok())
            .unwrap_or(ResidualDistribution::UnitExponential),
        "trapezoid_exp" => {
            let a = report.estimates.get(&key("a"));
            let ell = report.estimates.get(&key("ell"));
            match (a, ell) {
                (Some(&a), Some(&ell)) => ResidualDistribution::trapezoid_exp(a, ell)
                    .unwrap_or(ResidualDistribution::UnitExponential),
                _ => ResidualDistribution::UnitExponential,
            }
        }
        _ => ResidualDistribution::UnitExponential,
    }
}

fn write_fit_artifacts(
    out_dir: &Path,
    report: &FitReport,
    qq_reference: Option<&str>,
    hist_bins: usize,
) -> Result<()> {
    std::fs::write(out_dir.join("fit.json"), report.to_json())?;
    let multi = report.residuals.len() > 1;
    for (i, res) in report.residuals.iter().enumerate() {
        let suffix = if multi { format!("_type{i}") } else { String::new() };
        write_residuals_csv(out_dir.join(format!("residuals{suffix}.csv")), res)?;
        if res.is_empty() {
            continue;
        }
        write_histogram(&out_dir.join(format!("histogram{suffix}.csv")), res, hist_bins)?;
        let reference = match qq_reference {
            Some("fitted") | None => reference_dist(report, i, multi),
            Some("exp") => ResidualDistribution::UnitExponential,
            Some(spec) => parse_residual_spec(spec)?,
        };
        write_qq(&out_dir.join(format!("qq{suffix}.csv")), res, &reference)?;
    }
    Ok(())
}

pub fn cmd_estimate(cmd: EstimateCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let input = r.require::<String>("input", cmd.input)?;
    let series = EventSeries::read_csv(&input)?;
    let estimator = r.get_or("estimator", cmd.estimator, "mle".into())?;
    let family_str = r.get_or("family", cmd.family, "gamma".into())?;
    let min_events = r.get_or("min-events", cmd.min_events, 100)?;
    let symmetric = r.get_or("symmetric", cmd.symmetric, false)?;
    let lambda0 = r.get_opt("lambda0", cmd.lambda0)?;
    let hist_bins = r.get_or("hist-bins", cmd.hist_bins, 50)?;
    let qq_reference = r.get_opt::<String>("qq-reference", cmd.qq_reference)?;

    let opts = FitOptions { min_events, lambda0, symmetric, ..FitOptions::default() };
    let multi = series.num_types() > 1;
    let report = match (estimator.as_str(), multi) {
        ("mle", false) => estimate::mle_fit(&series, family_from_str(&family_str)?, &opts)?,
        ("mle", true) => estimate::mle_fit_mv(&series, family_from_str(&family_str)?, &opts)?,
        ("qmle", false) => estimate::qmle_exp_fit(&series, &opts)?,
        ("qmle", true) => estimate::qmle_exp_fit_mv(&series, &opts)?,
        ("gmm", false) => estimate::gmm_fit(&series, &GmmSpec::default(), &opts)?,
        ("gmm-identity", false) => estimate::gmm_fit(
            &series,
            &GmmSpec { weight_stage: WeightStage::Identity },
            &opts,
        )?,
        ("gmm" | "gmm-identity", true) => {
            return Err(Error::InvalidParameter(
                "GMM estimation applies to univariate series".into(),
            ))
        }
        (other, _) => {
            return Err(Error::InvalidParameter(format!(
                "unknown estimator: {other} (expected mle | qmle | gmm | gmm-identity)"
            )))
        }
    };
    write_fit_artifacts(&out_dir, &report, qq_reference.as_deref(), hist_bins)?;
    r.write_manifest(&out_dir, "estimate")
}

pub fn cmd_residuals(cmd: ResidualsCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let input = r.require::<String>("input", cmd.input)?;
    let series = EventSeries::read_csv(&input)?;
    let hist_bins = r.get_or("hist-bins", cmd.hist_bins, 50)?;
    let qq_reference = r.get_or("qq-reference", cmd.qq_reference, "exp".into())?;
    let reference = parse_residual_spec(&qq_reference)?;
    let params_file = r.get_opt::<String>("params-file", cmd.params_file)?;

    let residual_sets: Vec<Vec<f64>> = if let Some(pf) = params_file {
        let params = read_mv_params(Path::new(&pf))?;
        let lambda0_flag = r.get_opt("lambda0", cmd.lambda0)?;
        let lambda0: Vec<f64> = params
            .mu
            .iter()
            .map(|&mu| lambda0_flag.unwrap_or(mu))
            .collect();
        let (res, _) = multivariate::infer_residuals_mv(&series, &params, &lambda0)?;
        res
    } else {
        let mu = r.require("mu", cmd.mu)?;
        let alpha = r.require("alpha", cmd.alpha)?;
        let beta = r.require("beta", cmd.beta)?;
        let params = ExcitationParams::new(mu, alpha, beta)?;
        let lambda0 = r.get_or("lambda0", cmd.lambda0, mu)?;
        let (res, _) = univariate::infer_residuals(&series, &params, lambda0)?;
        vec![res]
    };
    let multi = residual_sets.len() > 1;
    for (i, res) in residual_sets.iter().enumerate() {
        let suffix = if multi { format!("_type{i}") } else { String::new() };
        write_residuals_csv(out_dir.join(format!("residuals{suffix}.csv")), res)?;
        if !res.is_empty() {
            write_histogram(&out_dir.join(format!("histogram{suffix}.csv")), res, hist_bins)?;
            write_qq(&out_dir.join(format!("qq{suffix}.csv")), res, &reference)?;
        }
    }
    r.write_manifest(&out_dir, "residuals")
}

pub fn cmd_fhs(cmd: FhsCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let seed = r.require("seed", cmd.common.seed)?;
    let input = r.require::<String>("input", cmd.input)?;
    let series = EventSeries::read_csv(&input)?;
    if series.num_types() > 1 {
        return Err(Error::InvalidSeries(
            "filtered historical simulation applies to univariate series".into(),
        ));
    }
    let estimator = r.get_or("estimator", cmd.estimator, "mle".into())?;
    let family_str = r.get_or("family", cmd.family, "gamma".into())?;
    let n_paths = r.get_or("n-paths", cmd.n_paths, 100)?;
    let tail_lo = r.get_or("tail-lo", cmd.tail_lo, 0.2)?;
    let tail_hi = r.get_or("tail-hi", cmd.tail_hi, 0.98)?;
    let min_events = r.get_or("min-events", cmd.min_events, 100)?;
    let max_path_files = r.get_or("max-path-files", cmd.max_path_files, n_paths)?;

    let opts = FitOptions { min_events, ..FitOptions::default() };
    let report = match estimator.as_str() {
        "mle" => estimate::mle_fit(&series, family_from_str(&family_str)?, &opts)?,
        "qmle" => estimate::qmle_exp_fit(&series, &opts)?,
        "gmm" => estimate::gmm_fit(&series, &GmmSpec::default(), &opts)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown estimator: {other} (expected mle | qmle | gmm)"
            )))
        }
    };
    let params = report.excitation_params()?;
    let lambda0 = report.lambda0.unwrap_or(params.mu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = univariate::fhs(&series, &params, lambda0, n_paths, &mut rng)?;

    for (i, path) in paths.iter().take(max_path_files).enumerate() {
        path.write_csv(out_dir.join(format!("fhs_path_{i:04}.csv")))?;
    }
    write_residuals_csv(out_dir.join("residuals.csv"), &report.residuals[0])?;

    let observed: Vec<f64> = series.inter_arrivals();
    let cutoff_lo = empirical_quantile(&observed, tail_lo);
    let cutoff_hi = empirical_quantile(&observed, tail_hi);
    let pooled: Vec<f64> = paths.iter().flat_map(|p| p.inter_arrivals()).collect();
    let frac = |data: &[f64], below: f64, above: f64| -> (f64, f64) {
        let n = data.len() as f64;
        (
            data.iter().filter(|&&x| x < below).count() as f64 / n,
            data.iter().filter(|&&x| x > above).count() as f64 / n,
        )
    };
    let (obs_below, obs_above) = frac(&observed, cutoff_lo, cutoff_hi);
    let (fhs_below, fhs_above) = frac(&pooled, cutoff_lo, cutoff_hi);
    let summary = serde_json::json!({
        "n_paths": n_paths,
        "n_events": series.len(),
        "estimator": estimator,
        "estimates": report.estimates,
        "cutoffs": {
            "lo_quantile": tail_lo,
            "hi_quantile": tail_hi,
            "lo_value": cutoff_lo,
            "hi_value": cutoff_hi,
        },
        "observed": {"frac_below": obs_below, "frac_above": obs_above},
        "fhs": {"frac_below": fhs_below, "frac_above": fhs_above},
    });
    std::fs::write(
        out_dir.join("fhs_summary.json"),
        serde_json::to_string_pretty(&summary).expect("json"),
    )?;
    r.write_manifest(&out_dir, "fhs")
}

fn load_tape(
    r: &mut Resolver,
    quotes: Option<String>,
    events: Option<String>,
    window: Option<String>,
) -> Result<(PriceEventSeries, f64, Option<flexhawkes::marketdata::QualityReport>)> {
    let quotes_path = r.get_opt::<String>("quotes", quotes)?;
    let events_path = r.get_opt::<String>("events", events)?;
    match (quotes_path, events_path) {
        (Some(qp), None) => {
            let q = QuoteSeries::read_csv(&qp)?;
            let window_str = r.get_opt::<String>("window", window)?;
            let (t0, t1) = match window_str {
                Some(w) => {
                    let parts: Vec<&str> = w.split(',').collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidParameter(format!(
                            "window must be t0,t1 in seconds, got {w}"
                        )));
                    }
                    (
                        parts[0].trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad window start: {}", parts[0]))
                        })?,
                        parts[1].trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad window end: {}", parts[1]))
                        })?,
                    )
                }
                None => (f64::NEG_INFINITY, f64::INFINITY),
            };
            let (tape, quality) = midprice_events(&q, (t0, t1))?;
            let origin = if t0.is_finite() { t0 } else { 0.0 };
            Ok((tape, origin, Some(quality)))
        }
        (None, Some(ep)) => Ok((PriceEventSeries::read_csv(&ep)?, 0.0, None)),
        _ => Err(Error::InvalidParameter(
            "exactly one of quotes and events is required".into(),
        )),
    }
}

pub fn cmd_sparsify(cmd: SparsifyCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let dt = r.require("dt", cmd.dt)?;
    let (tape, origin, quality) = load_tape(r, cmd.quotes, cmd.events, cmd.window)?;
    let sparse = sparsify(&tape, dt)?;
    sparse.write_csv(out_dir.join("sparse_events.csv"))?;
    if let Some(q) = quality {
        std::fs::write(
            out_dir.join("quality.json"),
            serde_json::to_string_pretty(&q).expect("json"),
        )?;
    }
    let events_out = r.get_or("events-out", cmd.events_out, false)?;
    if events_out {
        let model = sparse.to_event_series(origin)?;
        model.write_csv(out_dir.join("model_events.csv"))?;
    }
    r.write_manifest(&out_dir, "sparsify")
}

fn mv_params_from_report(report: &FitReport, m: usize) -> Result<MvExcitationParams> {
    let get = |k: &str| -> Result<f64> {
        report
            .estimates
            .get(k)
            .copied()
            .ok_or_else(|| Error::Numerical(format!("fit report missing {k}")))
    };
    let mut mu = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut alpha = vec![vec![0.0; m]; m];
    for i in 0..m {
        mu.push(get(&format!("mu{i}"))?);
        beta.push(get(&format!("beta{i}"))?);
        for (j, a) in alpha[i].iter_mut().enumerate() {
            *a = get(&format!("alpha{i}{j}"))?;
        }
    }
    MvExcitationParams::new(mu, alpha, beta)
}

fn dists_from_report(
    report: &FitReport,
    family: ResidualFamily,
    m: usize,
) -> Result<Vec<ResidualDistribution>> {
    (0..m)
        .map(|i| match family {
            ResidualFamily::Exponential => Ok(ResidualDistribution::UnitExponential),
            ResidualFamily::Gamma => {
                ResidualDistribution::gamma_with_unit_mean(report.estimates[&format!("shape{i}")])
            }
            ResidualFamily::TrapezoidExp => ResidualDistribution::trapezoid_exp(
                report.estimates[&format!("a{i}")],
                report.estimates[&format!("ell{i}")],
            ),
        })
        .collect()
}

pub fn cmd_volatility(cmd: VolatilityCmd, r: &mut Resolver) -> Result<()> {
    let out_dir = PathBuf::from(r.get_or("out-dir", cmd.common.out_dir.clone(), ".".into())?);
    ensure_out_dir(&out_dir)?;
    let seed = r.require("seed", cmd.common.seed)?;
    let dt_grid_str = r.require::<String>("dt-grid", cmd.dt_grid)?;
    let dt_grid: Vec<f64> = dt_grid_str
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad dt value: {s}")))
        })
        .collect::<Result<_>>()?;
    if dt_grid.iter().any(|&dt| !(dt > 0.0)) {
        return Err(Error::InvalidParameter("dt values must be positive".into()));
    }
    let n_paths = r.get_or("n-paths", cmd.n_paths, 2000)?;
    if n_paths < 2 {
        return Err(Error::InvalidParameter(
            "Monte-Carlo volatility needs at least 2 paths (a single path has no sample SD)"
                .into(),
        ));
    }
    let symmetric = r.get_or("symmetric", cmd.symmetric, true)?;
    let family = family_from_str(&r.get_or("family", cmd.family, "gamma".into())?)?;
    let min_events = r.get_or("min-events", cmd.min_events, 100)?;
    let burn_in = r.get_or("burn-in", cmd.burn_in, 0.0)?;
    let interpretation = match r
        .get_or("interpretation", cmd.interpretation, "centered".into())?
        .as_str()
    {
        "centered" => MomentInterpretation::Centered,
        "literal" => MomentInterpretation::Literal,
        other => {
            return Err(Error::InvalidParameter(format!(
                "interpretation must be centered or literal, got {other}"
            )))
        }
    };
    let (tape, origin, _) = load_tape(r, cmd.quotes, cmd.events, cmd.window)?;
    if tape.is_empty() {
        return Err(Error::InvalidSeries("empty price tape".into()));
    }
    let span = tape.times.last().unwrap() - origin;
    let horizon = r.get_or("horizon", cmd.horizon, span)?;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<serde_json::Value> = Vec::new();
    let mut w = csv::Writer::from_path(out_dir.join("vol_sweep.csv")).map_err(|e| Error::Csv {
        path: "vol_sweep.csv".into(),
        msg: e.to_string(),
    })?;
    w.write_record([
        "dt",
        "n_events",
        "hawkes_mu0",
        "hawkes_mu1",
        "hawkes_alpha_self",
        "hawkes_alpha_cross",
        "hawkes_beta0",
        "hawkes_beta1",
        "hvol",
        "flex_mu0",
        "flex_mu1",
        "flex_alpha_self",
        "flex_alpha_cross",
        "flex_beta0",
        "flex_beta1",
        "mc_vol",
    ])
    .map_err(|e| Error::Csv { path: "vol_sweep.csv".into(), msg: e.to_string() })?;

    for &dt in &dt_grid {
        let sparse = sparsify(&tape, dt)?;
        let model = sparse.to_event_series(origin)?;
        if model.len() < min_events {
            return Err(Error::InsufficientData { got: model.len(), need: min_events });
        }
        let marks = MarkMoments::from_series(&model)?;
        let mut pools: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        if let Some(ms) = model.marks() {
            for (&ty, &mk) in model.types().iter().zip(ms) {
                pools[ty as usize].push(mk);
            }
        }
        let opts = FitOptions { min_events, symmetric, ..FitOptions::default() };
        let hawkes_fit = estimate::qmle_exp_fit_mv(&model, &opts)?;
        let hawkes_params = mv_params_from_report(&hawkes_fit, 2)?;
        let solution = volatility::hawkes_vol(&hawkes_params, &marks, horizon, interpretation)?;

        let flex_fit = estimate::mle_fit_mv(&model, family, &opts)?;
        let flex_params = mv_params_from_report(&flex_fit, 2)?;
        let flex_dists = dists_from_report(&flex_fit, family, 2)?;
        let lambda0: Vec<f64> = flex_params.mu.clone();
        let mc_vol = volatility::monte_carlo_vol(
            &flex_params,
            &flex_dists,
            &lambda0,
            horizon,
            burn_in,
            n_paths,
            Some(&pools),
            master.random(),
        )?;

        w.write_record([
            format!("{dt}"),
            model.len().to_string(),
            format!("{}", hawkes_params.mu[0]),
            format!("{}", hawkes_params.mu[1]),
            format!("{}", hawkes_params.alpha[0][0]),
            format!("{}", hawkes_params.alpha[0][1]),
            format!("{}", hawkes_params.beta[0]),
            format!("{}", hawkes_params.beta[1]),
            format!("{}", solution.hvol),
            format!("{}", flex_params.mu[0]),
            format!("{}", flex_params.mu[1]),
            format!("{}", flex_params.alpha[0][0]),
            format!("{}", flex_params.alpha[0][1]),
            format!("{}", flex_params.beta[0]),
            format!("{}", flex_params.beta[1]),
            format!("{mc_vol}"),
        ])
        .map_err(|e| Error::Csv { path: "vol_sweep.csv".into(), msg: e.to_string() })?;

        rows.push(serde_json::json!({
            "dt": dt,
            "n_events": model.len(),
            "hawkes_fit": hawkes_fit.estimates,
            "flex_fit": flex_fit.estimates,
            "solution": solution,
            "mc_vol": mc_vol,
        }));
    }
    w.flush()?;
    std::fs::write(
        out_dir.join("volatility.json"),
        serde_json::to_string_pretty(&rows).expect("json"),
    )?;
    r.write_manifest(&out_dir, "volatility")
}
