//! `twinsvm` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twinsvm::TwinSvmError;

#[derive(Parser)]
#[command(name = "twinsvm", version, about = "Twin support vector machine training and evaluation")]
struct Cli {
    /// Worker threads for grid search, kernel and batch evaluation.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it to a JSON file.
    Train(TrainArgs),
    /// Predict labels for a data file with a saved model.
    Predict(PredictArgs),
    /// Cross-validated grid search; writes the report and the refit best model.
    Gridsearch(GridArgs),
    /// Generate synthetic normally distributed cluster data.
    GenData(GenArgs),
    /// Sample a two-feature model's decision surface on a mesh.
    PlotGrid(PlotArgs),
    /// Train/test timing ladder on generated data.
    Benchmark(BenchArgs),
    /// Print a saved model's metadata.
    InspectModel(InspectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Libsvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Tsvm,
    Lstsvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MulticlassArg {
    Ovo,
    Ova,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Input data file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Zero-based label column for CSV input.
    #[arg(long, default_value_t = 0)]
    label_col: usize,
    /// Whether the CSV file starts with a header line.
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "tsvm")]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    /// RBF width in exp(-gamma * |x - y|^2).
    #[arg(long, allow_negative_numbers = true, default_value_t = twinsvm::kernels::DEFAULT_GAMMA)]
    gamma: f64,
    /// Share of training rows kept as kernel reference points.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    rect: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    c2: f64,
    /// Ridge added to the class Gram matrices.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-5)]
    epsilon: f64,
    /// Solver stopping tolerance.
    #[arg(long, allow_negative_numbers = true, default_value_t = twinsvm::clipdcd::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Solver iteration cap per dual problem.
    #[arg(long, default_value_t = twinsvm::clipdcd::DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    /// Multiclass scheme; defaults to one-vs-one when there are more than two classes.
    #[arg(long, value_enum)]
    multiclass: Option<MulticlassArg>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    params: ModelArgs,
    /// Share of rows held out for evaluation; 0 trains on everything.
    #[arg(long, default_value_t = 0.0)]
    test_fraction: f64,
    /// Scale features to [0, 1] using the training rows' ranges.
    #[arg(long)]
    normalize: bool,
    /// Seed for the held-out split and kernel reference selection.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long, default_value = "model.json")]
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Label output file, one label per row; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    params: ModelArgs,
    /// Exponent range `lo:hi` of the c1 values 2^lo..2^hi.
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    c1_range: String,
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    c2_range: String,
    /// Exponent range of the RBF widths.
    #[arg(long, default_value = "-15:2", allow_hyphen_values = true)]
    gamma_range: String,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale features to [0, 1] before the search.
    #[arg(long)]
    normalize: bool,
    /// Search report file.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the best model refit on all rows.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short = 'n', long, default_value_t = 1000)]
    samples: usize,
    #[arg(short = 'd', long, default_value_t = 2)]
    features: usize,
    /// Clusters per class.
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 2.0)]
    separation: f64,
    /// Share of labels flipped.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    model: PathBuf,
    /// Data file whose bounding box sets the mesh extent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, default_value_t = 0)]
    label_col: usize,
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
    /// Mesh extent `lo:hi` along the first feature.
    #[arg(long, allow_hyphen_values = true)]
    x_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y_range: Option<String>,
    /// Mesh points per axis.
    #[arg(long, default_value_t = twinsvm::surface::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated sample counts.
    #[arg(long, value_delimiter = ',', default_values_t = twinsvm::benchmark::DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    features: usize,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    c2: f64,
    /// Largest dense dual matrix a TSVM fit may allocate, in MiB.
    #[arg(long, default_value_t = 2048)]
    memory_budget: usize,
    /// Restrict to one algorithm.
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    /// JSON report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<TwinSvmError> for CliError {
    fn from(e: TwinSvmError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Gridsearch(a) => commands::gridsearch(a),
        Command::GenData(a) => commands::gen_data(a),
        Command::PlotGrid(a) => commands::plot_grid(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::InspectModel(a) => commands::inspect_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
