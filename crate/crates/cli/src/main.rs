mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;

/// Derive, integrate and analyze higher-derivative Lagrangians.
#[derive(Parser)]
#[command(name = "ostro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the equation of motion, force ladder and Ostrogradski quantities as JSON.
    Derive {
        config: PathBuf,
        /// Substitute parameter values before deriving.
        #[arg(long)]
        bind: bool,
        /// Also write equations.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Integrate the equation of motion; writes trajectory.csv and summary.json.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Write a gnuplot script next to the data.
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Compare the full and Newtonian systems; writes report.json and series CSVs.
    Analyze {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        emit_gnuplot: bool,
        /// Record wall-clock duration in the report (makes reruns differ).
        #[arg(long)]
        timing: bool,
    },
    /// Run the analysis for each value of one parameter; writes sweep.csv.
    Sweep {
        config: PathBuf,
        /// Parameter to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(
            long,
            required = true,
            value_delimiter = ',',
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
        /// Worker threads (default: all cores).
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    overrides.apply(&mut cfg);
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Derive {
            config,
            bind,
            out_dir,
        } => {
            let write = out_dir.is_some();
            let cfg = load(
                &config,
                &Overrides {
                    out_dir,
                    ..Default::default()
                },
            )?;
            commands::derive(&cfg, bind, write || cfg.out_dir.is_some())
        }
        Command::Simulate {
            config,
            overrides,
            emit_gnuplot,
        } => commands::simulate(&load(&config, &overrides)?, emit_gnuplot),
        Command::Analyze {
            config,
            overrides,
            emit_gnuplot,
            timing,
        } => commands::analyze(&load(&config, &overrides)?, emit_gnuplot, timing),
        Command::Sweep {
            config,
            param,
            values,
            jobs,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            commands::sweep(&cfg, &param, &values, jobs.map(usize::from))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OSTRO_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
