use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use cpseg::config::{RunConfig, KEYS};
use cpseg::error::{CliError, Result, EXIT_CONFIG};
use cpseg::run::{execute, Mode};

/// Bayesian multiple-changepoint detection.
#[derive(Parser)]
#[command(name = "cpseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the collapsed changepoint sampler.
    Sample(RunArgs),
    /// Compute filtering recursions and draw exact samples.
    Recurse(RunArgs),
    /// Modal number of changepoints over a parameter grid.
    Sweep(RunArgs),
    /// Exact posterior by exhaustive enumeration (short series only).
    Enumerate(RunArgs),
    /// List the configuration keys.
    Keys,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file: `key = value` lines, JSON, or a previous summary.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override a configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(mode: Mode, args: &RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&args.set)?;
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    execute(mode, &cfg.resolve()?, &args.out)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let err = CliError::Config(e.kind().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (mode, args) = match &cli.command {
        Command::Sample(a) => (Mode::Sample, a),
        Command::Recurse(a) => (Mode::Recurse, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Enumerate(a) => (Mode::Enumerate, a),
        Command::Keys => {
            for (key, description) in KEYS {
                println!("{key:20} {description}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
