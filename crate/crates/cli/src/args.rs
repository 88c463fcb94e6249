use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gmrbm", version, about = "Train, sample and evaluate Gaussian-Multinoulli RBMs")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Key = value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for chains and sweep cells.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model with CD-k and write a checkpoint and training log.
    Train(TrainCmd),
    /// Draw visible samples from chains started at Gaussian noise.
    Sample(SampleCmd),
    /// Score clamped recall on a pair file.
    Recall(RecallCmd),
    /// Run a q sweep or a hidden-size sweep on synthetic pairs.
    Sweep(SweepCmd),
    /// Size matched GM-RBM and GB-RBM models.
    Match(MatchCmd),
    /// Print model dimensions, norms and chain diagnostics.
    Inspect(InspectCmd),
    /// Write a synthetic dataset.
    Synth(SynthCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerName {
    Gibbs,
    Langevin,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum, default_value = "gibbs")]
    pub sampler: SamplerName,
    /// Langevin step size.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Langevin updates per sweep.
    #[arg(long, default_value_t = 1)]
    pub langevin_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 1)]
    pub cd_k: usize,
    #[arg(long, default_value_t = 2)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub adam_eps: f64,
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: usize,
    /// Keep negative-phase chains across updates.
    #[arg(long)]
    pub persistent: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StopArgs {
    #[arg(long, default_value_t = 0.98)]
    pub target: f64,
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    #[arg(long, default_value_t = 0.01)]
    pub std_threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadoutName {
    Mean,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceName {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Args)]
pub struct RecallArgs {
    /// Clamped sweeps per query.
    #[arg(long = "recall-steps", visible_alias = "steps", default_value_t = 10)]
    pub recall_steps: usize,
    #[arg(long, value_enum, default_value = "mean")]
    pub readout: ReadoutName,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub distance: DistanceName,
}

#[derive(Debug, Clone, Args)]
pub struct TrainCmd {
    /// Vector file of training rows.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Treat rows as stimulus|response pairs: normalize them and validate by recall.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub q: usize,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub recall: RecallArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleCmd {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub n_samples: usize,
    /// Sweeps per chain; 0 returns the noise initialization.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RecallCmd {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Vector file whose rows are stimulus|response concatenations.
    #[arg(long, value_name = "PATH")]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub recall: RecallArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Q,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureName {
    Clustered,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoundingName {
    Floor,
    Ceil,
}

#[derive(Debug, Clone, Args)]
pub struct SweepCmd {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    /// Weight budget for the q sweep.
    #[arg(long, default_value_t = 50_000)]
    pub nw: usize,
    /// Visible units (twice the embedding width).
    #[arg(long, default_value_t = 100)]
    pub nv: usize,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,4")]
    pub q_list: Vec<usize>,
    /// States per slot for the hidden sweep.
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "8,16,32")]
    pub hidden_list: Vec<usize>,
    /// Numbers of stored pairs.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "50,100,200")]
    pub sizes: Vec<usize>,
    /// Seeds per cell; defaults to the global seed.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value = "clustered")]
    pub structure: StructureName,
    #[arg(long, value_enum, default_value = "floor")]
    pub rounding: RoundingName,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub recall: RecallArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatchModeName {
    Param,
    Capacity,
}

#[derive(Debug, Clone, Args)]
pub struct MatchCmd {
    #[arg(long, value_enum)]
    pub mode: MatchModeName,
    /// Weight budget (param mode).
    #[arg(long)]
    pub nw: Option<usize>,
    /// Visible units; capacity mode defaults to 400.
    #[arg(long, visible_alias = "n")]
    pub nv: Option<usize>,
    /// Hidden slots (capacity mode).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub q: usize,
    #[arg(long, value_enum, default_value = "floor")]
    pub rounding: RoundingName,
}

#[derive(Debug, Clone, Args)]
pub struct InspectCmd {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Enumerate every hidden code (small models only).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Enumeration limit for --exact.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
    /// Sweeps of the energy-autocorrelation run.
    #[arg(long, default_value_t = 1000)]
    pub diag_sweeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Pairs,
    Gmm,
}

#[derive(Debug, Clone, Args)]
pub struct SynthCmd {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub count: usize,
    /// Embedding width of each half (pairs).
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "clustered")]
    pub structure: StructureName,
    /// Mixture component as `weight:mean,...:var,...`; repeat per component.
    #[arg(long, action = ArgAction::Append)]
    pub component: Vec<String>,
}
