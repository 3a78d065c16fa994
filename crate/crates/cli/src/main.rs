//! `hmga` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod output;

use config::SeedRange;

#[derive(Debug, Parser)]
#[command(
    name = "hmga",
    version,
    about = "Hasofer-Lind reliability index by hybrid micro-genetic search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigKind {
    Run,
    Bench,
    Oracle,
    RepairTrace,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and write report.json, history.csv and regions.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for limit-state evaluations (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Also print the report (json) or the history (csv) on stdout.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Sweep benchmarks over a seed range and write summary.csv.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Half-open seed range `A..B`; overrides the config.
        #[arg(long)]
        seeds: Option<SeedRange>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a reference solver and write oracle.json with its command line.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Repair a single ray and write trace.csv and repair.json.
    RepairTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Parse and check a config file without solving anything.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "run")]
        kind: ConfigKind,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("HLRI_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            workers,
            format,
        } => commands::with_workers(workers, || commands::run(&config, &out, seed, format)),
        Command::Bench {
            config,
            out,
            seeds,
            workers,
            format,
        } => commands::with_workers(workers, || commands::bench(&config, &out, seeds, format)),
        Command::Oracle {
            config,
            out,
            workers,
            format,
        } => commands::with_workers(workers, || {
            commands::oracle(&config, out.as_deref(), format)
        }),
        Command::RepairTrace {
            config,
            out,
            format,
        } => commands::repair_trace(&config, &out, format),
        Command::ValidateConfig { config, kind } => commands::validate_config(&config, kind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
