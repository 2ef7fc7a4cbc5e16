//! `bessel-paths`: evaluations, reference tables, sweeps, zero tables,
//! verification reports and Monte Carlo runs.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 consistency
//! failure (routes disagree or a verification check fails), 3 convergence
//! or truncation failure.

mod commands;
mod output;
mod reference;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bessel_paths::{Error, PrecisionConfig, Route, TruncationPolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{num_full, Format, Report};

#[derive(Parser)]
#[command(name = "bessel-paths", version, about = "Maximal height of non-intersecting Bessel paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate P(max b_N < M) at one parameter point.
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Reproduce the M sweep at N = 10, alpha = 1, a = 1.
    Table1(TableArgs),
    /// Reproduce the a sweep at N = 10, alpha = 1, M = 5.
    Table2(TableArgs),
    /// Two-column sweep over M or a for plotting.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Dump a certified table of zeros of J_alpha.
    #[command(allow_negative_numbers = true)]
    Zeros(ZerosArgs),
    /// Run the cross-route and invariant checks.
    Verify(VerifyArgs),
    /// Monte Carlo estimate for a single path of integer dimension.
    #[command(allow_negative_numbers = true)]
    Mc(McArgs),
}

#[derive(Args, Clone, Debug)]
pub struct Numerics {
    /// Working precision: 53, 106 or 200..=4096 bits.
    #[arg(long, default_value_t = 106)]
    pub precision_bits: u32,
    /// Relative tail tolerance of the lattice sums.
    #[arg(long, default_value_t = TruncationPolicy::DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    /// Use exactly this many lattice terms instead of a tail tolerance.
    #[arg(long)]
    pub nmax: Option<usize>,
}

impl Numerics {
    pub fn precision(&self) -> Result<PrecisionConfig, CliError> {
        Ok(PrecisionConfig::new(self.precision_bits)?)
    }

    pub fn truncation(&self) -> Result<TruncationPolicy, CliError> {
        let t = match self.nmax {
            Some(n) => TruncationPolicy::fixed(n),
            None => TruncationPolicy::tail_tol(self.tail_tol),
        };
        t.validate()?;
        Ok(t)
    }

    /// Flags reproducing these settings.
    pub fn rerun(&self) -> String {
        match self.nmax {
            Some(n) => format!("--precision-bits {} --nmax {n}", self.precision_bits),
            None => format!("--precision-bits {} --tail-tol {}", self.precision_bits, num_full(self.tail_tol)),
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct EvalArgs {
    /// Number of paths.
    #[arg(long)]
    pub n: usize,
    /// Bessel order alpha > -1.
    #[arg(long)]
    pub alpha: f64,
    /// Common starting point a >= 0.
    #[arg(long)]
    pub a: f64,
    /// Wall height M.
    #[arg(long)]
    pub m: f64,
    /// thm1, thm2 (hankel), brownian-reflect, brownian-excursion or pitman-yor.
    #[arg(long, default_value = "thm1", value_parser = parse_route)]
    pub route: Route,
    /// Skip the cross-check against a second route.
    #[arg(long)]
    pub no_check: bool,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Args, Clone, Debug)]
pub struct TableArgs {
    #[arg(long, default_value = "thm1", value_parser = parse_route)]
    pub route: Route,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    M,
    A,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::M => "m",
            SweepVar::A => "a",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    /// Parameter to sweep.
    #[arg(long, value_enum)]
    pub variable: SweepVar,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    /// Start (required when sweeping M).
    #[arg(long)]
    pub a: Option<f64>,
    /// Wall (required when sweeping a).
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, default_value = "thm1", value_parser = parse_route)]
    pub route: Route,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Args, Clone, Debug)]
pub struct ZerosArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Certification tolerance on |J_alpha(x_n)| / max(1, n).
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    /// Precision of the stored zeros.
    #[arg(long, default_value_t = bessel_paths::specfun::DEFAULT_ZERO_BITS)]
    pub precision_bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Depth {
    Quick,
    Full,
}

#[derive(Args, Clone, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Depth::Quick)]
    pub depth: Depth,
    /// Seed of the random instances and the Monte Carlo check.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct McArgs {
    /// Dimension d >= 1 (integer); the order is d/2 - 1.
    #[arg(long)]
    pub dim: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long)]
    pub m: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Time steps per path, a power of two >= 1024.
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Numeric(s) => write!(f, "numerical failure: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Precision(_) | Error::Domain(_) => CliError::Usage(e.to_string()),
            Error::Pole(_) | Error::Overflow(_) | Error::Convergence(_) | Error::Truncation(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

/// A finished command: its report and, if a consistency check failed, why.
pub struct Outcome {
    pub report: Report,
    pub default_format: Format,
    pub inconsistency: Option<String>,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Table1(a) => commands::table(reference::Which::One, a),
        Command::Table2(a) => commands::table(reference::Which::Two, a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Zeros(a) => commands::zeros(a),
        Command::Verify(a) => verify::run(a),
        Command::Mc(a) => commands::mc(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("bessel-paths: {e}");
            return ExitCode::from(e.code());
        }
    };
    let text = outcome.report.render(cli.format.unwrap_or(outcome.default_format));
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("bessel-paths: {}", CliError::Io(e.to_string()));
        return ExitCode::from(1);
    }
    match outcome.inconsistency {
        Some(why) => {
            eprintln!("bessel-paths: consistency failure: {why}");
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    }
}
