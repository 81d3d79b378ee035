mod commands;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "pceuq", version, about = "Sparse polynomial chaos expansions fitted directly from data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to a CSV of inputs and one response column.
    Fit(FitArgs),
    /// Evaluate a saved model on a CSV of inputs.
    Predict(PredictArgs),
    /// Output mean, standard deviation and density by resampling the input model.
    Stats(StatsArgs),
    /// Run the training-size validation sweep on a synthetic benchmark.
    Benchmark(BenchmarkArgs),
    /// Fit KDE marginals and a C-vine copula to a CSV of samples.
    CopulaFit(CopulaFitArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Random seed; falls back to PCEUQ_SEED, then 0.
    #[arg(long, env = "PCEUQ_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Response column; defaults to the last column.
    #[arg(long)]
    target: Option<String>,
    /// apce-x, lpce-z or lpce-x.
    #[arg(long, default_value = "apce-x")]
    mode: String,
    #[arg(long)]
    p_max: Option<u32>,
    #[arg(long)]
    r_max: Option<usize>,
    #[arg(long, default_value_t = pceuq::pce::DEFAULT_Q)]
    q: f64,
    /// Skip the copula fit in the X-space modes (resampling then assumes independence).
    #[arg(long)]
    no_copula: bool,
    #[arg(long, short, default_value = "model.json")]
    out: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SamplerArg {
    Sobol,
    Random,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    n_resample: usize,
    #[arg(long, value_enum, default_value = "sobol")]
    sampler: SamplerArg,
    /// Resample the full fitted marginals instead of truncating them to the training range.
    #[arg(long)]
    full_support: bool,
    /// Output JSON; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// ishigami or truss.
    name: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 50, 100, 200, 500, 1000])]
    n_train: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    n_val: usize,
    /// Absolute standard deviation of Gaussian noise on the training outputs.
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long, default_value = "apce-x")]
    mode: String,
    /// Smaller validation sets (10^3) for a fast look.
    #[arg(long)]
    quick: bool,
    /// Also score mean, std and KL against a reference of this many true-model samples.
    #[arg(long)]
    reference: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    n_resample: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct CopulaFitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output JSON; only the summary is printed when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Stats(a) => commands::stats(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::CopulaFit(a) => commands::copula_fit(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
