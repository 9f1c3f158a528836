//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qipfot::dependence::{CloudMode, Marginals, ScoreRule};
use qipfot::experiment::Method;
use qipfot::sample::{KernelConfig, LaplacianMethod, SigmaRule};

#[derive(Debug, Parser)]
#[command(name = "qipfot", version, about = "QIPF moments, QIPF-OT dependence scores and the accompanying experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute QIPF moments of selected CSV columns.
    Qipf(QipfArgs),
    /// Score the dependence between two groups of CSV columns.
    Depend(DependArgs),
    /// Run a bundled experiment.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Moment couplings of two moons before and after a rotation.
    TwoMoon(TwoMoonArgs),
    /// Score curves over the equitability family.
    Equitability(EquitabilityArgs),
}

/// Kernel bandwidth: `auto` (Silverman) or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    Auto,
    Fixed(f64),
}

pub fn parse_sigma(s: &str) -> Result<Sigma, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Sigma::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Sigma::Fixed(v)),
        Ok(v) => Err(format!("sigma must be positive and finite, got {v}")),
        Err(_) => Err(format!("expected 'auto' or a number, got '{s}'")),
    }
}

impl Sigma {
    pub fn kernel(self, laplacian: LaplacianArg) -> KernelConfig {
        let base = match self {
            Sigma::Auto => KernelConfig { sigma_rule: SigmaRule::Silverman, ..KernelConfig::default() },
            Sigma::Fixed(v) => KernelConfig::manual(v),
        };
        base.with_laplacian(laplacian.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LaplacianArg {
    Analytic,
    Fd,
}

impl From<LaplacianArg> for LaplacianMethod {
    fn from(v: LaplacianArg) -> Self {
        match v {
            LaplacianArg::Analytic => LaplacianMethod::Analytic,
            LaplacianArg::Fd => LaplacianMethod::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreArg {
    Index,
    Count,
}

impl From<ScoreArg> for ScoreRule {
    fn from(v: ScoreArg) -> Self {
        match v {
            ScoreArg::Index => ScoreRule::IndexWeighted,
            ScoreArg::Count => ScoreRule::CountWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CloudArg {
    Profile,
    Quantile,
    Pointwise,
}

impl From<CloudArg> for CloudMode {
    fn from(v: CloudArg) -> Self {
        match v {
            CloudArg::Profile => CloudMode::Profile,
            CloudArg::Quantile => CloudMode::Quantile,
            CloudArg::Pointwise => CloudMode::Pointwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginalsArg {
    Rank,
    Raw,
}

impl From<MarginalsArg> for Marginals {
    fn from(v: MarginalsArg) -> Self {
        match v {
            MarginalsArg::Rank => Marginals::Rank,
            MarginalsArg::Raw => Marginals::Raw,
        }
    }
}

#[derive(Debug, Args)]
pub struct QipfArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated column indices (zero-based) or header names; all columns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Number of moments; orders are 1..=m.
    #[arg(long, default_value_t = 12)]
    pub moments: usize,
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma: Sigma,
    #[arg(long, value_enum, default_value_t = LaplacianArg::Analytic)]
    pub laplacian: LaplacianArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DependArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column(s) of the first variable, by index or header name.
    #[arg(long, value_delimiter = ',', required = true)]
    pub col_x: Vec<String>,
    /// Column(s) of the second variable.
    #[arg(long, value_delimiter = ',', required = true)]
    pub col_y: Vec<String>,
    #[arg(long, default_value_t = 12)]
    pub moments: usize,
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma: Sigma,
    #[arg(long, value_enum, default_value_t = LaplacianArg::Analytic)]
    pub laplacian: LaplacianArg,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = ScoreArg::Index)]
    pub score: ScoreArg,
    #[arg(long, value_enum, default_value_t = CloudArg::Profile)]
    pub cloud: CloudArg,
    #[arg(long, value_enum, default_value_t = MarginalsArg::Rank)]
    pub marginals: MarginalsArg,
    /// Score only the x-to-y direction.
    #[arg(long)]
    pub one_way: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write coupling.svg (requires --out).
    #[arg(long)]
    pub heatmap: bool,
    /// Exit with status 4 when transport does not converge.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct TwoMoonArgs {
    /// Points per moon.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 30.0)]
    pub rotation_deg: f64,
    #[arg(long, default_value_t = 12)]
    pub moments: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquitabilityArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Grid as start:stop:step.
    #[arg(long, default_value = "0:1:0.1", value_parser = parse_grid)]
    pub a_grid: Grid,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, value_delimiter = ',', default_value = "qipf-ot,pearson,spearman,dcor,mi,copula-ot")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Skip curves.svg.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parse `start:stop:step` into the inclusive grid, rounded to 12 decimals so
/// that e.g. `0.1 * 3` is written as `0.3`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{s}'"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number"));
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) || stop < start {
        return Err(format!("grid '{s}' needs finite start <= stop and a positive step"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(format!("grid '{s}' has too many points"));
    }
    Ok(Grid((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()))
}
