use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod svg;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] lozenge::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 1 for anything that went wrong while computing.
    fn exit_code(&self) -> u8 {
        use lozenge::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(E::InvalidRegion(_) | E::InvalidConfig(_) | E::InvalidParameter(_) | E::SizeLimit(_) | E::NoValidConfig | E::Unsupported(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "lozenge", version, about = "Exact counts, sampling and limit shapes for lozenge tilings with a free boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partition function of one endpoint configuration, as an exact rational.
    Count(CountArgs),
    /// Exact law of the endpoint configuration.
    Distribution(DistributionArgs),
    /// Metropolis run: endpoint histogram against the limit density.
    Sample(SampleArgs),
    /// Closed-form limit density on a grid.
    Density(DensityArgs),
    /// Points of the arctic curve.
    Arctic(ArcticArgs),
    /// Numerical band solution with forbidden and packed intervals.
    SolveGap(SolveGapArgs),
    /// Run the cross-validation suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionArg {
    Cut,
    HalfCut,
}

#[derive(Args, Debug, Clone)]
pub struct RegionArgs {
    /// Number of paths.
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    /// Weight per unit volume, e.g. 1, 2/3 or 0.5.
    #[arg(long, default_value = "1")]
    pub q: String,
    #[arg(long, value_enum, default_value_t = RegionArg::Cut)]
    pub region: RegionArg,
    /// Boundary stretch lo:hi, in units of k, where no endpoint may sit.
    #[arg(long, value_name = "LO:HI")]
    pub forbidden: Vec<String>,
    /// Boundary stretch lo:hi, in units of k, filled with endpoints.
    #[arg(long, value_name = "LO:HI")]
    pub packed: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Write the data here instead of stdout.
    #[arg(long, short)]
    pub out: Option<std::path::PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    pub svg: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Det,
    Product,
    Brute,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    /// Endpoint positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m: Vec<i64>,
    #[arg(long, value_enum, default_value_t = Method::Det)]
    pub method: Method,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct DistributionArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    /// Defaults to a fifth of the steps.
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, env = "LOZENGE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Defaults to the largest divisor of the site count not above points/500.
    #[arg(long)]
    pub bins: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Uniform,
    Qcut,
    TwoCorner,
    Hexagon,
    HalfCut,
    Triangle,
    Tsscpp,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Number of equally spaced points over the support.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ArcticArgs {
    #[arg(long)]
    pub lambda: f64,
    /// Second hexagon side; ignored with --cut.
    #[arg(long)]
    pub theta: Option<f64>,
    /// The cut hexagon instead of the full one.
    #[arg(long)]
    pub cut: bool,
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SolveGapArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_name = "LO:HI")]
    pub forbidden: Vec<String>,
    #[arg(long, value_name = "LO:HI")]
    pub packed: Vec<String>,
    /// Total mass of the endpoints, packed intervals included.
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Chebyshev nodes per band in the reported density grid.
    #[arg(long, default_value_t = 24)]
    pub nodes: usize,
    /// Print a JSON summary of the solution instead of the CSV grid.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Full-size sampler runs and draws (minutes instead of seconds).
    #[arg(long)]
    pub full: bool,
    #[arg(long, env = "LOZENGE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
