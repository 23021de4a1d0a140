//! Command-line pipeline for the flexible-residual exciting point process:
//! simulation, estimation, residual diagnostics, filtered historical
//! simulation, sparse-observation preprocessing, and volatility sweeps.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::Resolver;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flexhawkes", version, about = "Self-exciting point processes with flexible residuals")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// RNG seed; required by every stochastic command.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value config file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for all artifacts (created if missing).
    #[arg(long)]
    out_dir: Option<String>,
    /// Thread cap for path-level parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the univariate or multivariate process.
    Simulate(SimulateCmd),
    /// Fit a model by MLE, exponential QMLE, or two-step GMM.
    Estimate(EstimateCmd),
    /// Infer residuals at given parameters and emit diagnostics.
    Residuals(ResidualsCmd),
    /// Filtered historical simulation: fit, infer, resample, simulate.
    Fhs(FhsCmd),
    /// Sparse-observation preprocessing of a price tape.
    Sparsify(SparsifyCmd),
    /// Per-dt sweep: sparsify, fit bivariate models, closed-form and
    /// Monte-Carlo volatility.
    Volatility(VolatilityCmd),
}

#[derive(Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    common: Common,
    /// `flex` (default) or `hawkes` (forces exponential residuals).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// JSON file {"mu": [...], "alpha": [[...]], "beta": [...]} switches to
    /// the multivariate model.
    #[arg(long)]
    params_file: Option<String>,
    /// `exp` | `gamma:SHAPE` | `trapezoid:A,ELL` | `empirical:PATH`;
    /// `;`-separated per type for multivariate runs.
    #[arg(long)]
    residual: Option<String>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    n_events: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
pub struct EstimateCmd {
    #[command(flatten)]
    common: Common,
    /// Event CSV (`time,type,mark`).
    #[arg(long)]
    input: Option<String>,
    /// `mle` | `qmle` | `gmm` | `gmm-identity`.
    #[arg(long)]
    estimator: Option<String>,
    /// Residual family for MLE: `exp` | `gamma` | `trapezoid`.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    symmetric: Option<bool>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    min_events: Option<usize>,
    #[arg(long)]
    hist_bins: Option<usize>,
    /// `fitted` (default), `exp`, or an explicit residual spec.
    #[arg(long)]
    qq_reference: Option<String>,
}

#[derive(Args)]
pub struct ResidualsCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Multivariate parameter JSON (same schema as simulate).
    #[arg(long)]
    params_file: Option<String>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    hist_bins: Option<usize>,
    #[arg(long)]
    qq_reference: Option<String>,
}

#[derive(Args)]
pub struct FhsCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: Option<String>,
    /// `mle` (default) | `qmle` | `gmm`.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n_paths: Option<usize>,
    /// Lower tail quantile of observed inter-arrivals for the summary.
    #[arg(long)]
    tail_lo: Option<f64>,
    /// Upper tail quantile.
    #[arg(long)]
    tail_hi: Option<f64>,
    #[arg(long)]
    min_events: Option<usize>,
    /// Cap on the number of per-path CSVs written.
    #[arg(long)]
    max_path_files: Option<usize>,
}

#[derive(Args)]
pub struct SparsifyCmd {
    #[command(flatten)]
    common: Common,
    /// Quote CSV (`time_ns,bid,ask`).
    #[arg(long)]
    quotes: Option<String>,
    /// Price-event CSV (`time,price,direction,jump`).
    #[arg(long)]
    events: Option<String>,
    /// `t0,t1` in seconds when reading quotes.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    /// Also write the model event series (type 0 up / 1 down, jump marks).
    #[arg(long)]
    events_out: Option<bool>,
}

#[derive(Args)]
pub struct VolatilityCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    quotes: Option<String>,
    #[arg(long)]
    events: Option<String>,
    #[arg(long)]
    window: Option<String>,
    /// Comma-separated sparsification intervals, e.g. `0.5,1,2`.
    #[arg(long)]
    dt_grid: Option<String>,
    /// Volatility horizon in seconds; defaults to the tape span.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    symmetric: Option<bool>,
    /// Residual family of the flexible fit.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    min_events: Option<usize>,
    /// Monte-Carlo burn-in before the measured window.
    #[arg(long)]
    burn_in: Option<f64>,
    /// `centered` (default) or `literal` second-moment reading.
    #[arg(long)]
    interpretation: Option<String>,
}

fn common(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::Simulate(c) => &c.common,
        Cmd::Estimate(c) => &c.common,
        Cmd::Residuals(c) => &c.common,
        Cmd::Fhs(c) => &c.common,
        Cmd::Sparsify(c) => &c.common,
        Cmd::Volatility(c) => &c.common,
    }
}

fn run() -> flexhawkes::Result<()> {
    let cli = Cli::parse();
    let c = common(&cli.cmd);
    if let Some(threads) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| flexhawkes::Error::InvalidParameter(format!("threads: {e}")))?;
    }
    let mut resolver = Resolver::new(c.config.as_deref())?;
    match cli.cmd {
        Cmd::Simulate(cmd) => commands::cmd_simulate(cmd, &mut resolver),
        Cmd::Estimate(cmd) => commands::cmd_estimate(cmd, &mut resolver),
        Cmd::Residuals(cmd) => commands::cmd_residuals(cmd, &mut resolver),
        Cmd::Fhs(cmd) => commands::cmd_fhs(cmd, &mut resolver),
        Cmd::Sparsify(cmd) => commands::cmd_sparsify(cmd, &mut resolver),
        Cmd::Volatility(cmd) => commands::cmd_volatility(cmd, &mut resolver),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
