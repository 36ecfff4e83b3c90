//! Command-line runner for distributionally robust multistage experiments.

mod config;
mod error;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::Experiment;

#[derive(Parser)]
#[command(name = "drmco", version, about = "Data-driven distributionally robust multistage optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every model of the experiment and write reports and cuts.
    Solve(Common),
    /// Simulate trained policies on shared out-of-sample paths.
    Evaluate(Common),
    /// Solve, evaluate and summarize.
    Run(Common),
    /// Write the stage LPs of the configured problem in MPS format.
    ExportLp(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel LP solves.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

fn execute(command: Command) -> Result<(), CliError> {
    let (Command::Solve(c) | Command::Evaluate(c) | Command::Run(c) | Command::ExportLp(c)) = &command;
    let level = if c.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    if let Some(w) = c.workers {
        if w == 0 {
            return Err(CliError::config("--workers must be positive", Some("workers".into())));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let config = ExperimentConfig::load(&c.config)?;
    let out = c.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let experiment = Experiment::build(config)?;
    match command {
        Command::Solve(_) => experiment.solve(&out),
        Command::Evaluate(_) => experiment.evaluate(&out),
        Command::Run(_) => {
            experiment.solve(&out)?;
            experiment.evaluate(&out)
        }
        Command::ExportLp(_) => {
            for p in experiment.export_lp(&out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
