//! `epirep` command-line driver.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::CommonArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown {0}")]
    Unknown(String),
    #[error(transparent)]
    Lib(#[from] epirep::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Lib(epirep::Error::InvalidParameter(_)) => 2,
            Self::Unknown(_) => 3,
            Self::Lib(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "epirep", version, about = "Conjugates, control representations and value functions of convex Hamiltonians")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// Closed-form piecewise-linear triple (ex35 only).
    Explicit,
    /// Two-control variant of the closed-form triple (ex35 only).
    Modified,
    /// Steiner selection on the unit disk.
    Steiner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Ex33,
    Ex34,
    #[value(name = "ex35-nograph")]
    Ex35Nograph,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the conjugate on the x-window and check the biconjugate.
    Conjugate,
    /// Build a control representation and verify it.
    Represent {
        /// Defaults to explicit for ex35, steiner otherwise.
        #[arg(long, value_enum)]
        construction: Option<Construction>,
    },
    /// Run hypothesis checks.
    Verify,
    /// Solve the value function by dynamic programming.
    Value {
        /// Start of the exported optimal trajectory; defaults to the window midpoint.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
    },
    /// Convergence experiment for the ex51 family.
    Stability,
    /// Reproduce a counterexample.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[arg(long, default_value_t = 10)]
        i_max: u32,
        #[arg(long, default_value_t = 1000)]
        n_max: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match cli.command {
        Command::Conjugate => commands::conjugate(c),
        Command::Represent { construction } => commands::represent(c, construction),
        Command::Verify => commands::verify(c),
        Command::Value { x0 } => commands::value(c, x0),
        Command::Stability => commands::stability(c),
        Command::Reproduce { target, i_max, n_max } => commands::reproduce(c, target, i_max, n_max),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
