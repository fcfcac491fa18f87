use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{parse_number, ConfigError, RunConfig};

/// Order-N ODE truncations of one-dimensional maps.
///
/// Every numeric option can also be set in a config file (`--config`) as
/// `key = value`, with the option's long name and `_` for `-`. Flags take
/// precedence over the file. Numbers are decimals or exact rationals `a/b`.
///
/// Exit codes: 0 success, 1 domain error, 2 numeric error or failed
/// reproduction, 64 bad usage or config.
#[derive(Parser)]
#[command(name = "mapode", version)]
struct Cli {
    /// Config file of `key = value` lines (`#` starts a comment).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps and scans [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; the only randomness (the linear-oracle cases of `reproduce`) uses a fixed seed, so this has no effect.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the order-N truncation of a map and its first-order companion form.
    Truncate(TruncateOpts),
    /// Exact Hurwitz determinants, sign changes and verdict.
    Stability(StabilityOpts),
    /// Roots of the characteristic polynomial.
    Roots(StabilityOpts),
    /// Propagate the linearized system by the closed form and by the matrix exponential.
    Linear(LinearOpts),
    /// Integrate a system; CSV of (t, xi_1, ..., xi_N) with a status footer.
    Integrate(RunOpts),
    /// Largest Lyapunov exponent (JSON).
    Lyapunov(ClassifyOpts),
    /// Classify the attractor reached from x0 (JSON).
    Classify(ClassifyOpts),
    /// One-parameter bifurcation sweep.
    Bifurcate(BifurcateOpts),
    /// Two-parameter (nu, lambda) classification raster (CSV).
    Scan(ScanOpts),
    /// Run a named acceptance scenario and print PASS or FAIL.
    Reproduce(ReproduceOpts),
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s)
}

#[derive(Args, Clone, Default)]
pub struct MapArgs {
    /// Map as `logistic:<p>` or `poly:<c0>,<c1>,...` [default: logistic:4].
    #[arg(long)]
    pub map: Option<String>,
    /// Truncation order N [default: 3].
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Clone)]
pub struct TruncateOpts {
    #[command(flatten)]
    pub map: MapArgs,
    /// Reference point for the companion form [default: 0].
    #[arg(long, value_parser = number)]
    pub at: Option<f64>,
    /// text or json [default: text].
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Clone)]
pub struct StabilityOpts {
    /// Truncation order N [default: 3].
    #[arg(long)]
    pub order: Option<usize>,
    /// alpha = 1 - f'(x*), exact (`5/3`, `0.25`, `-2`).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Derive alpha from this map at `--at` instead.
    #[arg(long)]
    pub map: Option<String>,
    /// Reference point x* for `--map`.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub at: Option<f64>,
    /// text or json [default: text].
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Clone)]
pub struct LinearOpts {
    #[command(flatten)]
    pub map: MapArgs,
    /// Reference point x* [default: first fixed point of the map].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub at: Option<f64>,
    /// Time to propagate to [default: 1].
    #[arg(long, value_parser = number)]
    pub t: Option<f64>,
    /// Initial state, comma separated, padded with zeros [default: 0.1].
    #[arg(long, value_parser = number, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi0: Option<Vec<f64>>,
    /// text or json [default: text].
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Clone, Default)]
pub struct IntegratorArgs {
    /// rk4 (fixed step) or rk45 (adaptive Dormand-Prince) [default: rk4].
    #[arg(long)]
    pub method: Option<String>,
    /// RK4 step size [default: 0.01].
    #[arg(long, value_parser = number)]
    pub h: Option<f64>,
    /// Adaptive relative tolerance [default: 1e-9].
    #[arg(long, value_parser = number)]
    pub rel_tol: Option<f64>,
    /// Adaptive absolute tolerance [default: 1e-12].
    #[arg(long, value_parser = number)]
    pub abs_tol: Option<f64>,
    /// Stop as diverged once any |component| exceeds this [default: 1e8].
    #[arg(long, value_parser = number)]
    pub divergence_bound: Option<f64>,
    /// Output sample spacing [default: 0.02].
    #[arg(long, value_parser = number)]
    pub sample_stride: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct SystemArgs {
    /// `truncated` (map truncation) or `cubic` (scaled jerk form) [default: truncated].
    #[arg(long)]
    pub system: Option<String>,
    #[command(flatten)]
    pub map: MapArgs,
    /// Cubic nu [default: 2/3].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Cubic lambda [default: 2/3].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Cubic from a logistic parameter: nu = 2/3, lambda = 2(p-1)/9.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Initial state, padded with zeros [default: 0.3 truncated, 0.1 cubic].
    #[arg(long, value_parser = number, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
pub struct RunOpts {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// End time [default: 100].
    #[arg(long, value_parser = number)]
    pub t_end: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct ThresholdArgs {
    /// Discarded transient [default: 500].
    #[arg(long, value_parser = number)]
    pub t_transient: Option<f64>,
    /// Measurement window [default: 2000].
    #[arg(long, value_parser = number)]
    pub t_measure: Option<f64>,
    /// Tangent renormalization interval [default: 1].
    #[arg(long, value_parser = number)]
    pub renorm_interval: Option<f64>,
    /// Relative tolerance for grouping peaks [default: 1e-3].
    #[arg(long, value_parser = number)]
    pub peak_tol: Option<f64>,
    /// Vector-field max-norm below which a run is at rest [default: 1e-6].
    #[arg(long, value_parser = number)]
    pub fp_tol: Option<f64>,
    /// Lyapunov exponent above which a run is chaotic [default: 5e-3].
    #[arg(long, value_parser = number)]
    pub chaos_tol: Option<f64>,
    /// Largest period reported as periodic [default: 16].
    #[arg(long)]
    pub max_period: Option<usize>,
    /// Fewest maxima needed for a verdict [default: 8].
    #[arg(long)]
    pub min_maxima: Option<usize>,
}

#[derive(Args, Clone)]
pub struct ClassifyOpts {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Clone)]
pub struct BifurcateOpts {
    /// `cubic`, `logistic3` or `logistic4` [default: cubic].
    #[arg(long)]
    pub system: Option<String>,
    /// Swept parameter: p, nu or lambda [default: lambda].
    #[arg(long)]
    pub param: Option<String>,
    /// Lower end of the sweep [default: 0.2].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Upper end of the sweep [default: 1.3].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Grid points [default: 1101].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fixed nu when not swept [default: 2/3].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Fixed lambda when not swept [default: 2/3].
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// `follow` (seed each point with the previous attractor) or `cold` [default: follow].
    #[arg(long)]
    pub continuation: Option<String>,
    /// Cold-start state [default: 0.1 cubic, 0.3 logistic].
    #[arg(long, value_parser = number, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// csv (param,peak), json (records) or svg [default: csv].
    #[arg(long)]
    pub format: Option<String>,
    /// Where to write the per-point JSON summary for csv output [default: <output>.json].
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Clone)]
pub struct ScanOpts {
    /// nu axis as lo,hi,steps [default: 0.3,1.2,200].
    #[arg(long)]
    pub nu_range: Option<String>,
    /// lambda axis as lo,hi,steps [default: 0.2,1.4,200].
    #[arg(long)]
    pub lambda_range: Option<String>,
    /// Cold-start state [default: 0.1,0,0].
    #[arg(long, value_parser = number, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Clone)]
pub struct ReproduceOpts {
    /// Scenario id; see `--list`.
    #[arg(required_unless_present = "list")]
    pub id: Option<String>,
    /// List scenario ids.
    #[arg(long)]
    pub list: bool,
    /// Print supporting measurements.
    #[arg(short, long)]
    pub verbose: bool,
}

pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<mapode::Error>() {
        Some(e) if e.is_numeric() => EXIT_NUMERIC,
        Some(_) => EXIT_DOMAIN,
        None if err.downcast_ref::<commands::ReproductionFailed>().is_some() => EXIT_NUMERIC,
        None => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let threads = match (cli.threads, cfg.raw("threads")) {
        (None, None) => None,
        (flag, _) => Some(cfg.integer(flag, "threads", 0)?),
    };
    let out = commands::Output::new(cli.output.clone());
    let command = cli.command;
    mapode::sweep::with_threads(threads, move || commands::dispatch(command, &cfg, &out))?
}
