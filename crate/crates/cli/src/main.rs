//! `funkball`: batch driver for the metric, norm, counterexample and solver
//! routines.
//!
//! Exit codes: 0 success, 1 verification or certification failure, 2 invalid
//! input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use funkball::FunkError;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or parameters (exit 2).
    Validation(String),
    /// A check, certification or computation failed (exit 1).
    Failure(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Failure(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<FunkError> for CliError {
    fn from(e: FunkError) -> Self {
        match e {
            FunkError::Dimension(_)
            | FunkError::Parameter(_)
            | FunkError::FunkLimit
            | FunkError::OutsideBall(_)
            | FunkError::Length { .. }
            | FunkError::Config(_)
            | FunkError::Nonlinearity(_)
            | FunkError::Weight(_) => CliError::Validation(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "funkball", version, about = "Funk-type Randers metrics on the ball: metric calculus, Sobolev norms and a radial solver")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Config file (`key = value` lines, optional `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Interpolation parameter in [0, 1].
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Master seed of the random initial guesses.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true, env = "FUNKBALL_WORKERS")]
    workers: Option<usize>,
    /// Directory receiving CSV/JSON output and the resolved config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-check against the brute-force oracles; mismatches exit with 1.
    #[arg(long, global = true)]
    verify: bool,
    /// Extra config overrides, `key=value`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate F_a, its polar, the Legendre map and the metric constants at a point.
    Metric(MetricArgs),
    /// W^{1,2,a} and H^1_2 norms of a radial profile.
    Norms(NormsArgs),
    /// C1(R), C2(R) for the a = 1 counterexample and the divergence verdict.
    Counterexample(CounterexampleArgs),
    /// Solve at one lambda.
    Solve(SolveArgs),
    /// Solve along a lambda schedule.
    Scan(ScanArgs),
    /// Diagnostic tables.
    Diag(DiagArgs),
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    /// Point in the ball, comma separated; a single value is placed on the first axis.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Tangent vector.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Covector.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Print only the reversibility constant.
    #[arg(long)]
    reversibility: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `h (1 - (r/rho)^2)_+^2`.
    Bump,
    /// `-sqrt(1 - r)`.
    Counterexample,
}

#[derive(Args, Debug)]
pub struct NormsArgs {
    #[arg(long, value_enum, default_value = "bump")]
    profile: ProfileKind,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    height: f64,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Use `-u` instead of `u`.
    #[arg(long)]
    negate: bool,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Truncation radii, comma separated (default `1 - 10^-k`, k = 2..8).
    #[arg(long)]
    schedule: Option<String>,
    /// Tolerance on C1 at the largest radius.
    #[arg(long, default_value_t = 1e-6)]
    c1_tol: f64,
    /// Relative tolerance on the C2 log-slope.
    #[arg(long, default_value_t = 0.05)]
    slope_tol: f64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// `<num>`, `<num>*lstar` or `<num>*ltilde`.
    #[arg(long, default_value = "10*ltilde", allow_hyphen_values = true)]
    lambda: String,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Comma-separated lambda tokens (`<num>`, `<num>*lstar`, `<num>*ltilde`).
    #[arg(long, default_value = "0.1*lstar,0.5*lstar,5*ltilde,10*ltilde")]
    schedule: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagTable {
    /// `G(t u) / ||t u||^2` along the trial direction.
    Subquadraticity,
    /// Analytic gradient against central differences.
    Gradient,
}

#[derive(Args, Debug)]
pub struct DiagArgs {
    #[arg(long, value_enum, default_value = "subquadraticity")]
    table: DiagTable,
    /// Lambda token for the gradient table.
    #[arg(long, default_value = "1*ltilde", allow_hyphen_values = true)]
    lambda: String,
    /// Random states in the gradient table.
    #[arg(long, default_value_t = 20)]
    states: usize,
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 1e3)]
    t_max: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(n) = common.n {
        cfg.n = n;
    }
    if let Some(a) = common.a {
        cfg.a = a;
    }
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli.common)?;
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::Validation("workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    }
    let verify = cli.common.verify;
    match cli.command {
        Command::Metric(args) => commands::metric(&cfg, &args, verify),
        Command::Norms(args) => commands::norms(&cfg, &args, verify),
        Command::Counterexample(args) => commands::counterexample(&cfg, &args),
        Command::Solve(args) => commands::solve(&cfg, &args),
        Command::Scan(args) => commands::scan(&cfg, &args),
        Command::Diag(args) => commands::diag(&cfg, &args, verify),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("funkball: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Failure(_) => ExitCode::from(1),
            }
        }
    }
}
