//! Front end of `torvol`: problem configs in, tables out.

pub mod commands;
pub mod config;

use thiserror::Error;

pub use commands::{run, Command, Output, RunOptions};
pub use config::ProblemConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<torvol_core::Error> for CliError {
    fn from(e: torvol_core::Error) -> Self {
        use torvol_core::Error as E;
        match e {
            E::NoConvergence(_) | E::BudgetExceeded { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
