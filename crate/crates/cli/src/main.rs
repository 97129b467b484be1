//! `junction`: generate labeled intersection scenarios, run the rule oracle,
//! export fine-tuning data and score traffic controllers.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status contract: 0 ok, 1 operational failure, 2 invalid input.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Operational(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Operational(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

pub fn failed(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Operational(e.into())
}

#[derive(Debug, Parser)]
#[command(name = "junction", version, about = "Intersection conflict scenarios, oracle labels and controller evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Intersection layout document (JSON); the stock eight-lane layout when omitted.
    #[arg(long, global = true)]
    pub layout: Option<PathBuf>,
    /// Conflict time window in seconds.
    #[arg(long, global = true, default_value_t = 5.0)]
    pub window: f64,
    /// Arrival difference treated as simultaneous, in seconds.
    #[arg(long = "tie-eps", global = true, default_value_t = 0.5)]
    pub tie_eps: f64,
    /// Clearance gap behind a vehicle that has right of way, in seconds.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub gap: f64,
    /// Seed for generation and splitting (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled scenario dataset and its manifest.
    Generate(GenerateArgs),
    /// Analyze one scenario document.
    Detect(DetectArgs),
    /// Print the natural-language description of a scenario.
    Describe { file: PathBuf },
    /// Print the system and user prompts for a scenario.
    Prompt {
        file: PathBuf,
        /// Emit a chat record (system, user, assistant) as JSON instead.
        #[arg(long)]
        json: bool,
    },
    /// Convert a labeled dataset into chat-format JSONL, optionally split.
    Export(ExportArgs),
    /// Score a controller against a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Render a saved analysis document or evaluation summary as text.
    Report { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range<T>(pub T, pub T);

impl<T: FromStr> FromStr for Range<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
        let parse = |x: &str| x.trim().parse::<T>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Range(parse(lo)?, parse(hi)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratios(pub f64, pub f64, pub f64);

impl FromStr for Ratios {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [a, b, c] => Ok(Ratios(a, b, c)),
            _ => Err(format!("expected TRAIN,VAL,TEST, got {s:?}")),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Vehicles per scenario, inclusive.
    #[arg(long, default_value = "2..8")]
    pub vehicles: Range<usize>,
    /// Speed range in km/h.
    #[arg(long, default_value = "20..80")]
    pub speed: Range<f64>,
    /// Distance-to-stop-line range in metres.
    #[arg(long, default_value = "50..450")]
    pub distance: Range<f64>,
    /// Exact fraction of conflict scenarios to keep.
    #[arg(long)]
    pub balance: Option<f64>,
    /// Also write train/validation/test dataset files.
    #[arg(long)]
    pub split: Option<Ratios>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub file: PathBuf,
    /// Write analysis.json and report.txt here instead of printing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub split: Option<Ratios>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnparseableArg {
    Negative,
    Exclude,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// reference | mock:<script file> | remote
    #[arg(long, default_value = "reference")]
    pub controller: String,
    /// Chat-completions URL for the remote controller.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Re-score a saved transcript instead of calling the endpoint.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    #[arg(long = "timeout-secs", default_value_t = 60.0)]
    pub timeout_secs: f64,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    #[arg(long, value_enum, default_value_t = UnparseableArg::Negative)]
    pub unparseable: UnparseableArg,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invalid(e) | Failure::Operational(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
