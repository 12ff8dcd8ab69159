//! Command-line plumbing: configuration, replica orchestration and
//! CSV/JSON emission. The `regen` binary is a thin wrapper around this.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_constants, cmd_hittime, cmd_simulate, cmd_tail, cmd_verify, CommandOutput};
pub use config::{
    ConstantsArgs, FileConfig, Format, HittimeArgs, HittimeConfig, Model, ModelArgs, SimulateArgs, SimulateConfig,
    TailArgs, TailConfig,
};

use crate::error::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Failed verification suite or I/O failure.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
/// NoRoot, Convergence and other numeric failures.
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Verify(_) => EXIT_FAILURE,
            CliError::Core(e) => match e {
                Error::Budget(_) => EXIT_BUDGET,
                Error::Model(_) => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
