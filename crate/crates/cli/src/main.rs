mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Analyze multi-species Curie-Weiss models: minima of G, limit laws of the
/// normalized spin sums, exact finite-N verification and Glauber sampling.
#[derive(Parser, Debug)]
#[command(name = "cwlimits", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locate and classify the global minima of G and predict their limit laws.
    Analyze(AnalyzeArgs),
    /// Compare exact finite-N moments against the predicted limit law over a size sweep.
    Verify(VerifyArgs),
    /// Estimate normalized moments with a heat-bath Monte-Carlo chain.
    Sample(SampleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Model file {"sizes": [...], "J": [[...]], "h": [...]}.
    #[arg(long)]
    pub model: PathBuf,
    /// Write the machine-readable result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Start points per axis of the multi-start grid.
    #[arg(long, default_value_t = cwlimits::landscape::DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = cwlimits::landscape::DEFAULT_GRID)]
    pub grid: usize,
    /// Strictly increasing per-species sizes, e.g. "100,200,400,800".
    #[arg(long, default_value = "100,200,400,800")]
    pub sizes: String,
    /// Integer species weights: species l gets size·w_l spins. Must keep the model's proportions.
    #[arg(long)]
    pub split: Option<String>,
    /// Condition on the magnetization ball around this point, e.g. "0.9,0.9".
    #[arg(long, requires = "ball_radius", allow_hyphen_values = true)]
    pub ball_center: Option<String>,
    #[arg(long, requires = "ball_center")]
    pub ball_radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = cwlimits::landscape::DEFAULT_GRID)]
    pub grid: usize,
    /// Per-species size to simulate (scaled by the split); defaults to the model's sizes.
    #[arg(long)]
    pub sizes: Option<u64>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub sweeps: u64,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = match &cli.command {
        Command::Analyze(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Sample(a) => &a.common,
    };
    if let Some(k) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sample(a) => commands::sample(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
