//! Command-line front end: clustering, simulation, experiments, sweeps, and
//! the verification suite.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure.

pub mod commands;
pub mod io;
pub mod report;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "knnclust",
    about = "Two-cluster detection on k-nearest-neighbor graphs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cluster a CSV dataset or a named preset
    Cluster(ClusterArgs),
    /// Generate a synthetic mixture and write it as CSV
    Simulate(SimulateArgs),
    /// Repeated seeded simulation runs with scoring
    Experiment(ExperimentArgs),
    /// Per-k sweep of the criteria (plottable)
    SweepK(SweepKArgs),
    /// Score-ratio sweep over a varying signal parameter
    SweepKappa(SweepKappaArgs),
    /// Run the enumeration and argmax verification suite
    Verify(VerifyArgs),
}

/// How to pick the neighborhood size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KChoice {
    Grid,
    Ternary,
    Fixed(usize),
}

impl std::str::FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(KChoice::Grid),
            "ternary" => Ok(KChoice::Ternary),
            other => other
                .parse::<usize>()
                .map(KChoice::Fixed)
                .map_err(|_| format!("expected `grid`, `ternary`, or an integer, got `{other}`")),
        }
    }
}

impl std::fmt::Display for KChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KChoice::Grid => f.write_str("grid"),
            KChoice::Ternary => f.write_str("ternary"),
            KChoice::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    StudentT,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VaryArg {
    A,
    B,
}

/// Mixture parameters; either a preset name or explicit values, with explicit
/// flags overriding preset fields.
#[derive(Args, Debug, Clone)]
pub struct MixtureArgs {
    /// Named preset (see README for the catalog)
    #[arg(long)]
    pub preset: Option<String>,
    /// Cluster-1 size
    #[arg(long)]
    pub m: Option<usize>,
    /// Cluster-2 size
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension
    #[arg(long)]
    pub d: Option<usize>,
    /// Location shift of cluster 2
    #[arg(long)]
    pub a: Option<f64>,
    /// Covariance/scale multiplier of cluster 2
    #[arg(long)]
    pub b: Option<f64>,
    /// AR(1) covariance decay
    #[arg(long)]
    pub rho: Option<f64>,
    /// Row distribution family
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Degrees of freedom for student-t rows
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "preset"])))]
pub struct ClusterArgs {
    /// CSV of observations (rows) by features (columns)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Cluster a generated preset instead of a file
    #[arg(long)]
    pub preset: Option<String>,
    /// Single-column file of true labels (1/2) for scoring `--input` data
    #[arg(long, conflicts_with = "preset")]
    pub truth: Option<PathBuf>,
    /// `grid`, `ternary`, or a fixed integer k
    #[arg(long, default_value = "grid")]
    pub k: KChoice,
    #[arg(long, default_value_t = 1.55)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spacing of the default k grid
    #[arg(long, default_value_t = 2)]
    pub grid_step: usize,
    /// z-score each feature before computing distances
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the canonical labels, one per line
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    /// Cap worker threads
    #[arg(long)]
    pub threads: Option<usize>,
    /// Include wall-clock runtime_ms in the report (off keeps repeated runs
    /// byte-identical)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub mixture: MixtureArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Permute the rows (truth file stays aligned)
    #[arg(long)]
    pub shuffle: bool,
    /// Where to write the data CSV
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write the true labels, one per line
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    /// Where to write generator metadata (JSON)
    #[arg(long)]
    pub meta_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub mixture: MixtureArgs,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// `grid`, `ternary`, or a fixed integer k
    #[arg(long, default_value = "grid")]
    pub k: KChoice,
    #[arg(long, default_value_t = 1.55)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub grid_step: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct SweepKArgs {
    /// CSV of observations; alternatively give --preset or explicit mixture
    /// parameters to sweep generated data
    #[arg(long, conflicts_with_all = ["preset", "m", "n", "d", "a", "b", "rho", "family", "df"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub mixture: MixtureArgs,
    /// True labels for `--input` data; adds the mis_rate column
    #[arg(long, conflicts_with = "preset")]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 1.55)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub grid_step: usize,
    /// z-score each feature before computing distances
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepKappaArgs {
    #[command(flatten)]
    pub mixture: MixtureArgs,
    /// Which signal parameter to vary
    #[arg(long, value_enum)]
    pub vary: VaryArg,
    /// Values of the varied parameter
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 1.55)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random graphs per (N, m, k) combination in the moment check
    #[arg(long, default_value_t = 20)]
    pub graphs: usize,
    /// Random models per scenario in the argmax check
    #[arg(long, default_value_t = 50)]
    pub models: usize,
    /// Random (graph, labels, flip) triples in the incremental check
    #[arg(long, default_value_t = 10_000)]
    pub flip_triples: usize,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successful exits; anything else is an
            // input error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}
