//! `sasvi` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "sasvi", version, about = "Safe feature screening for the Lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic correlated-Gaussian regression instance.
    Gen(GenArgs),
    /// Screen features once, from a solution at lambda1 to lambda2.
    Screen(ScreenArgs),
    /// Run screened solves along a lambda path and report rejection ratios.
    Path(PathArgs),
    /// Per-feature sure-removal parameters from a solution at lambda1.
    SureRemoval(SureRemovalArgs),
    /// Repeat path runs over generated instances and aggregate timings.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Number of samples.
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    /// Number of features.
    #[arg(long, default_value_t = 10_000)]
    pub p: usize,
    /// Number of nonzero coefficients in the true model.
    #[arg(long, default_value_t = 100)]
    pub pbar: usize,
    /// Feature correlation: corr(x_i, x_j) = rho^|i-j|.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Output directory; receives instance.lsv and instance.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Scale every column of X to unit norm before writing.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Binary LSV1 file written by `gen`.
    Raw,
    /// X as CSV (`# n p` header), y in a separate file given by --y.
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Raw)]
    pub format: Format,
    /// Response file for --format csv.
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Scale every column of X to unit norm after loading.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Relative duality-gap tolerance for every solve.
    #[arg(long, default_value_t = 1e-10)]
    pub gap_tol: f64,
    /// Coordinate-descent sweep cap per solve.
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
}

#[derive(Args, Debug)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Anchor parameter as a fraction of lambda_max.
    #[arg(long)]
    pub lambda1: f64,
    /// Target parameter as a fraction of lambda_max.
    #[arg(long)]
    pub lambda2: f64,
    #[arg(long, default_value = "sasvi")]
    pub rule: String,
    /// Discard when the bound is below 1 - margin.
    #[arg(long, default_value_t = sasvi_core::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Per-feature report CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solve at lambda2 and check that no discarded feature is active.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Comma-separated rules to run, each in its own lane.
    #[arg(long, default_value = "sasvi,safe,dpp,strong")]
    pub rules: String,
    /// Number of grid points.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Smallest lambda / lambda_max.
    #[arg(long, default_value_t = 0.05)]
    pub lo: f64,
    /// Largest lambda / lambda_max.
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = sasvi_core::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Also solve every point without screening and compare.
    #[arg(long)]
    pub baseline: bool,
    /// Screen every point from the lambda_max anchor.
    #[arg(long)]
    pub fixed_anchor: bool,
    /// Worker threads for independent lanes.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args, Debug)]
pub struct PathArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for rejection.csv, timing.json and path.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SureRemovalArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Anchor parameter as a fraction of lambda_max.
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long, default_value_t = sasvi_core::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Per-feature CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Number of instances; trial t uses seed + t.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Aggregate JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Screen(a) => commands::screen(&a),
        Command::Path(a) => commands::path(&a),
        Command::SureRemoval(a) => commands::sure_removal(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
