//! `dde-hopf`: stability, Hopf and convergence analysis of scalar delay models
//! from a TOML run configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model invariant violated,
//! 4 runtime failure (divergent simulation or unconverged root search).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::Format;

#[derive(Parser, Debug)]
#[command(name = "dde-hopf", version, about)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tabular output format; overrides `output.format` from the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Equilibrium, Hopf point, convergence rate and Lyapunov coefficient.
    Analyze,
    /// Grid sweeps over tau, eta or epsilon.
    Sweep,
    /// Integrate the delay equation and summarize the trajectory.
    Simulate,
    /// Characteristic roots in a rectangle of the upper half plane.
    Roots,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Invariant(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Invariant(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<dde_hopf::Error> for CliError {
    fn from(e: dde_hopf::Error) -> Self {
        use dde_hopf::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidConfig(_) | E::StepTooLarge { .. } => CliError::Config(msg),
            E::Divergence { .. } | E::NoConvergence(_) => CliError::Runtime(msg),
            _ => CliError::Invariant(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let result = config::load(path).and_then(|loaded| {
        let ctx = commands::Context::new(loaded, cli.out.clone(), cli.format);
        match cli.command {
            Command::Analyze => commands::analyze(&ctx),
            Command::Sweep => commands::sweep(&ctx),
            Command::Simulate => commands::simulate(&ctx),
            Command::Roots => commands::roots(&ctx),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
