use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sharpe_omega::omega::OmegaMethod;

#[derive(Debug, Parser)]
#[command(name = "sharpe-omega", version, about = "Sharpe ratio and Omega measure portfolio tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize the Sharpe ratio of a portfolio built from a price file.
    Optimize(OptimizeArgs),
    /// Evaluate the Omega measure of a single return distribution.
    Omega(OmegaArgs),
    /// Omega of skew-normal returns over a range of skewness at fixed mean and volatility.
    SweepSkew(SweepArgs),
    /// Time the active-set solver against the projected-gradient QP on synthetic instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Sras,
    Qp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Normal,
    Skewnormal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    /// Price CSV: `date,<label>,...` header, one row per date.
    #[arg(long)]
    pub prices: PathBuf,
    /// Benchmark return L (same period as the prices).
    #[arg(long, allow_negative_numbers = true)]
    pub benchmark: f64,
    #[arg(long, value_enum, default_value_t = Solver::Sras)]
    pub solver: Solver,
    /// Drop the no-short-sale constraint and report the closed-form optimum.
    #[arg(long)]
    pub allow_short: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap [default: 3n² for sras, 200000 + 1000n² for qp]
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OmegaArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[arg(long, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long)]
    pub stddev: f64,
    /// Skewness; skew-normal only.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub skew: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: f64,
    /// quadrature, partial-moment, monte-carlo or closed-form (normal only)
    #[arg(long, default_value = "quadrature")]
    pub method: OmegaMethod,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.3)]
    pub stddev: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = -0.99)]
    pub gamma_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.99)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// quadrature, partial-moment, monte-carlo or closed-form (normal only)
    #[arg(long, default_value = "quadrature")]
    pub method: OmegaMethod,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Where to write the CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 30)]
    pub assets: usize,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// SRAS iteration cap [default: 3n²]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Where to write the per-instance CSV table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
}
