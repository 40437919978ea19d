use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qstress::bench::ModelKind;
use qstress::config::{DatasetSource, ExperimentConfig, ReportFormat};
use qstress::data::Task;
use qstress::encodings::Entanglement;

#[derive(Parser, Debug)]
#[command(
    name = "qstress",
    version,
    about = "Quantum and classical stress classifiers on SCR event data",
    after_help = "Exit codes: 0 success, 1 validation error, 2 runtime failure.\n\
                  QSTRESS_THREADS caps worker threads (default: all cores)."
)]
pub struct Cli {
    /// Log verbosity on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic SCR event CSV
    GenData(GenDataArgs),
    /// Compute a Gram matrix over the rows of a CSV
    Kernel(KernelArgs),
    /// Fit one model on the training split and save it as JSON
    Train(TrainArgs),
    /// Score a saved model on its test split or on another CSV
    Evaluate(EvaluateArgs),
    /// Stratified k-fold accuracy of one model over the sampled rows
    CrossValidate(CrossValidateArgs),
    /// Fit all five models and write the comparison report
    Compare(CompareArgs),
    /// Re-render report files from a saved report.json
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// Number of events
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Generator seed
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Zz,
    Angle,
    Amplitude,
    Rbf,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EntanglementArg {
    Full,
    Linear,
    DisjointPairs,
}

impl From<EntanglementArg> for Entanglement {
    fn from(e: EntanglementArg) -> Self {
        match e {
            EntanglementArg::Full => Entanglement::Full,
            EntanglementArg::Linear => Entanglement::Linear,
            EntanglementArg::DisjointPairs => Entanglement::DisjointPairs,
        }
    }
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    /// Kernel: a quantum feature map or a classical kernel
    #[arg(long, value_enum, default_value_t = MapArg::Zz)]
    pub map: MapArg,
    /// Qubits for the quantum maps (zz: 8, angle: 4, amplitude: 2)
    #[arg(long)]
    pub qubits: Option<usize>,
    /// ZZ pairwise angle scale
    #[arg(long, default_value_t = 0.7)]
    pub alpha: f64,
    /// ZZ repetitions
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// ZZ entangling pairs
    #[arg(long, value_enum, default_value_t = EntanglementArg::Full)]
    pub entanglement: EntanglementArg,
    /// RBF width
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// Use only the first N rows
    #[arg(long)]
    pub limit: Option<usize>,
    /// Input event CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output kernel CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    LinearSvm,
    RbfSvm,
    Qsvm,
    Nn,
    Qnn,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::LinearSvm => ModelKind::LinearSvm,
            ModelArg::RbfSvm => ModelKind::RbfSvm,
            ModelArg::Qsvm => ModelKind::Qsvm,
            ModelArg::Nn => ModelKind::Nn,
            ModelArg::Qnn => ModelKind::Qnn,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass4,
}

/// Experiment settings shared by the model subcommands. Each flag overrides
/// the matching config key; without `--config` the built-in defaults apply.
#[derive(Args, Debug, Default)]
pub struct ExperimentArgs {
    /// JSON experiment config
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Event CSV to use instead of the configured dataset source
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Rows sampled from the dataset [default: 100]
    #[arg(long)]
    pub sample_n: Option<usize>,
    /// Training share of the sampled rows [default: 0.8]
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Label task [default: binary]
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Sampling, split and fold seed [default: 42]
    #[arg(long)]
    pub seed_sampling: Option<u64>,
    /// Weight initialization seed [default: 7]
    #[arg(long)]
    pub seed_init: Option<u64>,
    /// Dropout and batch shuffling seed [default: 11]
    #[arg(long)]
    pub seed_dropout: Option<u64>,
    /// SVM box constraint [default: 0.5]
    #[arg(long)]
    pub c: Option<f64>,
    /// RBF width [default: 2.0]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// QSVM ZZ alpha [default: 0.7]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// QNN learning rate [default: 0.05]
    #[arg(long)]
    pub qnn_lr: Option<f64>,
    /// QNN epoch cap [default: 200]
    #[arg(long)]
    pub qnn_epochs: Option<usize>,
    /// NN epoch cap [default: 500]
    #[arg(long)]
    pub nn_epochs: Option<usize>,
}

impl ExperimentArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(p) = &self.data {
            cfg.dataset = DatasetSource::Csv { path: p.clone() };
        }
        macro_rules! set {
            ($flag:ident => $($target:tt)+) => {
                if let Some(v) = self.$flag {
                    cfg.$($target)+ = v;
                }
            };
        }
        set!(sample_n => sample_n);
        set!(train_fraction => train_fraction);
        set!(seed_sampling => seeds.sampling);
        set!(seed_init => seeds.init);
        set!(seed_dropout => seeds.dropout);
        set!(c => svm.c);
        set!(gamma => svm.gamma);
        set!(alpha => qsvm.alpha);
        set!(qnn_lr => qnn.train.learning_rate);
        set!(qnn_epochs => qnn.train.max_epochs);
        set!(nn_epochs => nn.max_epochs);
        if let Some(t) = self.task {
            cfg.task = match t {
                TaskArg::Binary => Task::Binary,
                TaskArg::Multiclass4 => Task::Multiclass4,
            };
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Where to write the trained model JSON
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Model JSON written by `train`
    #[arg(long)]
    pub model: PathBuf,
    /// Score every row of this CSV instead of the saved test split
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CrossValidateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Number of folds
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Svg,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Svg => ReportFormat::Svg,
        }
    }
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Report directory [default: report]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report formats, comma separated [default: json,csv,svg]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<FormatArg>,
    /// Skip the feature-map comparison panel
    #[arg(long)]
    pub no_feature_maps: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// A report.json written by `compare`
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Formats to render, comma separated
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Csv, FormatArg::Svg])]
    pub format: Vec<FormatArg>,
}
