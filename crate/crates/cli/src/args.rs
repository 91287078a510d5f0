use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Effective loss and error rates for loss-tolerant graph-state schemes.
///
/// Every option can also be set in a key-value file passed with `--config`.
/// Precedence, lowest first: built-in default, `LOSSPROP_WORKERS`, config
/// file, command-line flag.
#[derive(Debug, Parser)]
#[command(name = "lossprop", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rates of one scheme instance.
    Rates(RatesArgs),
    /// Rates over a grid of one parameter.
    Sweep(SweepArgs),
    /// Physical loss rate at which a tree stops helping.
    BreakEven(BreakEvenArgs),
    /// Best tree shape within a qubit budget.
    OptimizeTree(OptimizeArgs),
    /// Cross-engine self-check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Duan,
    Tree,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Abstain,
    CoinFlip,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Loss,
    Error,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    Parity,
    Tree,
    Duan,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Key-value file with default option values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Worker threads for sampling; 0 uses every core.
    #[arg(long, env = "LOSSPROP_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    #[arg(long, value_enum, default_value = "analytic")]
    pub engine: EngineArg,
    /// Monte-Carlo samples per point.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Base seed; drawn at random and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level of reported intervals.
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    /// Majority vote over indirect measurements (otherwise first success).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "false")]
    pub voting: bool,
    /// How a split vote is resolved.
    #[arg(long, value_enum, default_value = "abstain")]
    pub tie: TieArg,
    /// Try indirect measurement before direct.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "false")]
    pub prefer_indirect: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub scheme: Scheme,

    /// Gate success probability (duan).
    #[arg(long, help_heading = "Bonding")]
    pub pg: Option<f64>,
    /// Arm length (duan); derived from --n-target and --epsilon when omitted.
    #[arg(long, help_heading = "Bonding")]
    pub n_l: Option<usize>,
    /// Target cluster size used to size the arms (duan).
    #[arg(long, help_heading = "Bonding")]
    pub n_target: Option<u64>,
    /// Failure tolerance used to size the arms (duan).
    #[arg(long, help_heading = "Bonding")]
    pub epsilon: Option<f64>,
    /// Total depolarizing rate per qubit (duan).
    #[arg(long, help_heading = "Bonding")]
    pub p_error: Option<f64>,
    #[arg(long, help_heading = "Bonding")]
    pub p_x: Option<f64>,
    #[arg(long, help_heading = "Bonding")]
    pub p_y: Option<f64>,
    #[arg(long, help_heading = "Bonding")]
    pub p_z: Option<f64>,

    /// Branching per level, e.g. 3,3 (tree).
    #[arg(long, help_heading = "Tree")]
    pub branching: Option<String>,
    /// Physical loss probability (tree).
    #[arg(long, help_heading = "Tree")]
    pub p_loss: Option<f64>,
    /// Local measurement error probability (tree).
    #[arg(long, help_heading = "Tree")]
    pub p_local: Option<f64>,
    #[command(flatten)]
    pub policy: PolicyArgs,

    /// Parity code length (parity).
    #[arg(long, help_heading = "Parity")]
    pub n: Option<u64>,
    /// Repetition count (parity).
    #[arg(long, help_heading = "Parity")]
    pub q: Option<u64>,
    /// Per-qubit flip probability (parity).
    #[arg(long, help_heading = "Parity")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub sampling: Sampling,
    /// Replay this Monte-Carlo sample with event tracing to standard error.
    #[arg(long, value_name = "INDEX")]
    pub trace: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub sampling: Sampling,
    /// Swept parameter: p_loss, p_local, p_error, p_g, n_l, b, n or q.
    #[arg(long)]
    pub param: String,
    /// Explicit comma-separated values; may be empty.
    #[arg(long, conflicts_with_all = ["from", "to", "steps"])]
    pub values: Option<String>,
    #[arg(long, requires_all = ["to", "steps"])]
    pub from: Option<f64>,
    #[arg(long, requires_all = ["from", "steps"])]
    pub to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"])]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BreakEvenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub branching: String,
    #[arg(long)]
    pub p_local: f64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// loss: effective loss equals physical loss; error: effective error equals
    /// p_local; both: whichever of the two comes first.
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1e-6)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hi: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Maximum qubits per tree, root included.
    #[arg(long)]
    pub budget: u64,
    #[arg(long)]
    pub p_loss: f64,
    #[arg(long)]
    pub p_local: f64,
    /// Largest acceptable effective loss.
    #[arg(long)]
    pub loss_target: f64,
    #[arg(long, default_value_t = 1)]
    pub min_depth: usize,
    #[arg(long, default_value_t = lossprop::sweep::MAX_DEPTH)]
    pub max_depth: usize,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reduced suite.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "false")]
    pub quick: bool,
    #[arg(long, default_value_t = 20_250_101)]
    pub seed: u64,
    /// Replace one analytic formula with a deliberately wrong one.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}
