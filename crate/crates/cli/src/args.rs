use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::{Format, LogBase};

#[derive(Debug, Parser)]
#[command(name = "steinlab", version, about = "Stein exponents for distributed quantum hypothesis testing")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON problem file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = LogBase::Nats)]
    pub log_base: LogBase,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// A built-in problem named on the command line instead of a file.
#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter; repeat for several.
    #[arg(long = "param", allow_negative_numbers = true)]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponents and bounds for a pair of hypotheses.
    Exponent(PresetArgs),
    /// The geometric-mean gap of a classical-quantum instance.
    Kappa,
    /// Closed-form bounds for isotropic and Werner families.
    Bounds(BoundsArgs),
    /// Classical I-projection onto fixed marginals.
    Iproject,
    /// Quantum I-projection onto fixed marginals.
    Qproject(PresetArgs),
    /// Max-min search over local projective measurements.
    Maxmin(MaxminArgs),
    /// Verify the blowing-up construction on random contractions.
    Blowup(BlowupArgs),
    /// Exact and sampled errors of the one-bit scheme.
    Simulate(SimulateArgs),
    /// Run the built-in reproduction suite.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Isotropic,
    Werner,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Single parameter value; omit to sweep.
    #[arg(long)]
    pub p: Option<f64>,
    /// Grid points on [0, 1] when sweeping.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    NelderMead,
    RandomSearch,
    CoordinateRotations,
}

#[derive(Debug, Clone, Args)]
pub struct MaxminArgs {
    #[command(flatten)]
    pub problem: PresetArgs,
    /// Copies per measured block.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = OptimizerArg::NelderMead)]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 1500)]
    pub max_evals: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BlowupArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rn: f64,
    /// Defaults to `tr(ρ^{⊗n} M)` for each trial.
    #[arg(long)]
    pub epsn: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Check the bipartite construction on two-qubit states.
    #[arg(long)]
    pub bipartite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    /// Local typicality tests combined by AND.
    OneBit,
    /// First-symbol tests combined by agreement.
    FirstAgree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Robust,
    Interval,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::OneBit)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Robust)]
    pub mode: ModeArg,
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Monte Carlo trials per block length; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    /// Run a single item.
    pub item: Option<String>,
}
