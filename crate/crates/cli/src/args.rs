use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vakonomic::{Aggregation, Integrator, Mode};

#[derive(Debug, Parser)]
#[command(name = "vakonomic", version, about = "Vakonomic and nonholonomic mechanics on Dirac structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a system and write its trajectory and run report.
    Simulate(SimulateArgs),
    /// Sample charts and test whether the vakonomic and nonholonomic submanifolds are Lagrangian.
    Pullback(PullbackArgs),
    /// Certify D = D⊥ on random linear Dirac structures and the presymplectic graphs.
    CheckDirac(CheckDiracArgs),
    /// List the built-in systems with their dimensions and default parameters.
    ListSystems,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct SystemSource {
    /// Built-in system name (see list-systems).
    #[arg(long, group = "source")]
    pub system: Option<String>,
    /// System definition file.
    #[arg(long, group = "source")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[command(flatten)]
    pub source: SystemSource,
    /// Parameter override for a built-in system, as name=value. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Vakonomic,
    Nonholonomic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Vakonomic => Mode::Vakonomic,
            ModeArg::Nonholonomic => Mode::Nonholonomic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntegratorArg {
    Rk4,
    MidpointImplicit,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Self {
        match i {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::MidpointImplicit => Integrator::ImplicitMidpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggregationArg {
    Max,
    Sum,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Self {
        match a {
            AggregationArg::Max => Aggregation::Max,
            AggregationArg::Sum => Aggregation::Sum,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Initial configuration, comma separated (default: zeros).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q0: Option<Vec<f64>>,
    /// Initial velocity, comma separated (default: zeros).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
    /// Multiplier seed, comma separated (default: zeros).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value = "vakonomic")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "rk4")]
    pub integrator: IntegratorArg,
    #[arg(long, default_value_t = 1e-12)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub newton_max_iter: usize,
    /// How per-condition Dirac residuals are combined.
    #[arg(long, value_enum, default_value = "max")]
    pub aggregation: AggregationArg,
    /// Write the trajectory CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PullbackArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Number of random charts per submanifold kind.
    #[arg(long, default_value_t = 100)]
    pub charts: usize,
    /// Fixed multipliers, comma separated (default: a random unit vector per chart).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckDiracArgs {
    /// Dimension of the random linear structures.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub dim: u32,
    /// Number of random instances.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also run a symmetric-form control that must be rejected.
    #[arg(long)]
    pub negative_control: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
