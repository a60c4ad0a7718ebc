//! Argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infosep_core::dist::Unit;

#[derive(Debug, Parser)]
#[command(
    name = "infosep",
    version,
    about = "Information measures on finite joint distributions and their invariance under sufficient reductions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute every measure on one distribution and emit a JSON report.
    Measures(MeasuresArgs),
    /// Collapse a distribution to its minimal sufficient statistics.
    Reduce(ReduceArgs),
    /// Compare measures on a distribution and on its reduction.
    Verify(VerifyArgs),
    /// Run the IB solver over a β grid and emit CSV.
    IbSweep(IbSweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Bits,
    Nats,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Unit {
        match u {
            UnitArg::Bits => Unit::Bits,
            UnitArg::Nats => Unit::Nats,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Distribution file: JSON {"p": [[...]], "x_labels", "y_labels"} or headerless CSV.
    pub input: PathBuf,
    /// Accept nonnegative weights that do not sum to 1 (e.g. counts).
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = UnitArg::Bits)]
    pub unit: UnitArg,
    /// Seed for the randomized solver starts.
    #[arg(long, env = "INFOSEP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Random restarts per solver call.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Markov residual I(X;Y|W) accepted by the Wyner solver, in bits.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// IB multipliers; repeat the flag or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Alphabet size of W (default nx·ny).
    #[arg(long)]
    pub wyner_card: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Re-check sufficiency of the maps and fail with exit code 4 if it does not hold.
    #[arg(long)]
    pub strict: bool,
    /// Write the reduced distribution here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the maps here; without --out they are printed with the distribution.
    #[arg(long)]
    pub maps_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Mi,
    Finfo,
    Gk,
    Wyner,
    Ib,
    Theta,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["maps", "auto_refine"]))]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON file {"s": [...], "t": [...]} mapping the input onto its statistics.
    #[arg(long)]
    pub maps: Option<PathBuf>,
    /// Treat the input as a base joint, refine it to NX×NY symbols and verify the refinement.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub auto_refine: Option<Vec<usize>>,
    /// Fail with exit code 4 before computing anything if the maps are not sufficient.
    #[arg(long)]
    pub strict: bool,
    /// Measures to compare (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub measure: Vec<MeasureArg>,
    /// Allowed gap for closed-form measures.
    #[arg(long, default_value_t = 1e-9)]
    pub exact_tol: f64,
    /// Allowed gap for solver-based measures, in bits.
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
    /// Alphabet size of W for both solves (default nx·ny of each joint).
    #[arg(long)]
    pub wyner_card: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IbSweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Ascending β values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub beta_grid: Vec<f64>,
    /// Alphabet size of U (default nx + 1).
    #[arg(long)]
    pub card_u: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}
