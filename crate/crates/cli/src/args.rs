//! Command-line surface. Every subcommand record is serializable so a run can
//! be echoed to `config.json` and replayed with `repro --config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use zeroloss_core::{ActivationSpec, Precision, WeightDistribution};

use crate::spec::DatasetSpec;

#[derive(Debug, Parser)]
#[command(name = "zeroloss", version, about = "Random-features conditioning experiments for one-hidden-layer networks")]
pub struct Cli {
    /// Worker threads for independent trials (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, env = "ZEROLOSS_OUT_DIR", default_value = "zeroloss-out")]
    pub out_dir: PathBuf,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate or ingest a dataset on the unit sphere.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Condition numbers of finite-width Gram matrices across widths.
    Spectra(SpectraArgs),
    /// Population kernel matrix and its eigenvalues.
    Population(PopulationArgs),
    /// Width bounds from matrix concentration.
    Bounds(BoundsArgs),
    /// Parity census of an activation's expansion coefficients.
    Certify(CertifyArgs),
    /// Gradient descent on the last layer.
    Train(TrainArgs),
    /// Landweber filter values and Gram spectra.
    Landweber(LandweberArgs),
    /// Joint SGD training of both layers.
    JointTrain(JointArgs),
    /// Figure pipelines on synthetic stand-ins, or replay of an echoed config.
    Repro(ReproArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dataset(DatasetCmd::Gen(_)) => "dataset gen",
            Command::Dataset(DatasetCmd::Ingest(_)) => "dataset ingest",
            Command::Spectra(_) => "spectra",
            Command::Population(_) => "population",
            Command::Bounds(_) => "bounds",
            Command::Certify(_) => "certify",
            Command::Train(_) => "train",
            Command::Landweber(_) => "landweber",
            Command::JointTrain(_) => "joint-train",
            Command::Repro(_) => "repro",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetCmd {
    Gen(GenArgs),
    Ingest(IngestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Uniform,
    BadSet,
    Synthetic1,
    Synthetic2,
    ProstateStandin,
    FashionStandin,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: DatasetKind,
    /// Number of points (uniform only).
    #[arg(long)]
    pub n: Option<usize>,
    /// Ambient dimension (uniform and bad-set).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Numeric CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label_col: String,
    /// Standardize each feature column before projecting.
    #[arg(long)]
    pub standardize: bool,
    /// Keep this many principal components before projecting.
    #[arg(long)]
    pub pca_dims: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectraArgs {
    /// Defaults to dataset.csv in the output directory.
    #[arg(long)]
    pub dataset: Option<DatasetSpec>,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationSpec,
    #[arg(long, value_delimiter = ',', required = true)]
    pub widths: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value = "uniform")]
    pub distribution: WeightDistribution,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write per-width quantiles.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PopulationArgs {
    #[arg(long)]
    pub dataset: Option<DatasetSpec>,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationSpec,
    /// Use the closed-form ReLU kernel instead of the quadrature expansion.
    #[arg(long)]
    pub closed_form: bool,
    /// Use the closed-form ReLU neural tangent kernel.
    #[arg(long, conflicts_with = "closed_form")]
    pub ntk: bool,
    /// Expansion truncation.
    #[arg(long, default_value_t = 500)]
    pub k: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    /// Bound on |γ| over [-1, 1].
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub lambda_min: f64,
    /// κ(H); enables the Bernstein bound.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Largest singular value of X; enables the Gaussian-weight bound.
    #[arg(long)]
    pub sigma1: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub abs_const: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub activation: ActivationSpec,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 500)]
    pub k: usize,
    #[arg(long, default_value_t = zeroloss_core::harmonics::certificate::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = zeroloss_core::harmonics::certificate::DEFAULT_THRESHOLD)]
    pub threshold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepChoice {
    /// 2/(λ_min + λ_max) of the Gram matrix.
    LemmaOptimal,
    /// --eta if given (must be below 2/λ_max), else 1/λ_max.
    SpectralCap,
    /// --eta as given.
    Fixed,
}

/// Hidden-layer width: `--width` wins over `--width-mult · n`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WidthArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, default_value_t = 200.0)]
    pub width_mult: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: Option<DatasetSpec>,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationSpec,
    #[command(flatten)]
    pub width: WidthArgs,
    #[arg(long, value_enum, default_value_t = StepChoice::LemmaOptimal)]
    pub step_rule: StepChoice,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u64,
    /// Stop when the residual norm falls to this value.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub distribution: WeightDistribution,
    /// Record the least-norm gap at every iteration up to this one.
    #[arg(long, default_value_t = 20)]
    pub dense_until: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LandweberArgs {
    #[arg(long)]
    pub dataset: Option<DatasetSpec>,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationSpec,
    #[command(flatten)]
    pub width: WidthArgs,
    #[arg(long, value_enum, default_value_t = StepChoice::LemmaOptimal)]
    pub step_rule: StepChoice,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Iteration counts at which filter values are reported.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100,1000")]
    pub ks: Vec<u64>,
    /// Expansion truncation for the population spectrum.
    #[arg(long, default_value_t = 500)]
    pub truncation: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub distribution: WeightDistribution,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct JointArgs {
    #[arg(long, default_value = "synthetic1")]
    pub dataset: DatasetSpec,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationSpec,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, default_value_t = 1.5)]
    pub width_mult: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 0.99)]
    pub lr_decay: f64,
    /// f32 rounds every stored quantity to single precision.
    #[arg(long, default_value = "f32")]
    pub precision: Precision,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(args_conflicts_with_subcommands = true)]
pub struct ReproArgs {
    #[command(subcommand)]
    pub figure: Option<Figure>,
    /// Re-run the command recorded in an echoed config.json.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// Median condition number against width for each activation.
    Figure1(Figure1Args),
    /// Gradient-descent residuals with the optimal fixed step.
    Figure2(Figure2Args),
    /// Gram spectra and Landweber filter values.
    Figure3(Figure3Args),
    /// Conditioning during joint training.
    Figure4(Figure4Args),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure1Args {
    #[arg(long, default_value = "synthetic1")]
    pub dataset: DatasetSpec,
    #[arg(long, value_delimiter = ',', default_value = "relu,swish,wendland0,wendland2")]
    pub activations: Vec<ActivationSpec>,
    /// Widths as multiples of n.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    pub width_mults: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value = "uniform")]
    pub distribution: WeightDistribution,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure2Args {
    #[arg(long, default_value = "prostate-standin")]
    pub dataset: DatasetSpec,
    #[arg(long, value_delimiter = ',', default_value = "relu,swish,wendland0,wendland2")]
    pub activations: Vec<ActivationSpec>,
    #[arg(long, default_value_t = 200.0)]
    pub width_mult: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure3Args {
    #[arg(long, default_value = "prostate-standin")]
    pub dataset: DatasetSpec,
    #[arg(long, value_delimiter = ',', default_value = "relu,swish,wendland0,wendland2")]
    pub activations: Vec<ActivationSpec>,
    #[arg(long, default_value_t = 200.0)]
    pub width_mult: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    pub ks: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    pub truncation: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure4Args {
    #[arg(long, default_value = "synthetic1")]
    pub dataset: DatasetSpec,
    #[arg(long, default_value_t = 1.5)]
    pub width_mult: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value = "f32")]
    pub precision: Precision,
    /// One training run per seed.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
}
