//! Library side of the `jetrao` command: configuration, commands and
//! report rendering.

pub mod config;
pub mod report;
pub mod run;

use jetrao_core::bounds::BoundsError;
use jetrao_core::families::FamilyError;
use thiserror::Error;

pub use config::{Format, RunConfig};
pub use report::Report;
pub use run::{cmd_bounds, cmd_efficiency, cmd_families_list, cmd_jet_check, RunOptions};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const GRAM_SINGULAR: i32 = 3;
    pub const IDENTITY_FAILURE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("Gram matrix singular at θ={theta}, order {m} (rank {rank}); rerun with --allow-degenerate to report anyway")]
    GramSingular { theta: f64, m: usize, rank: usize },
    #[error("{0} identity check(s) failed")]
    IdentityFailure(usize),
    #[error(transparent)]
    Family(FamilyError),
    #[error(transparent)]
    Bounds(BoundsError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::GramSingular { .. } => exit::GRAM_SINGULAR,
            CliError::IdentityFailure(_) => exit::IDENTITY_FAILURE,
            CliError::Family(_) | CliError::Bounds(_) | CliError::Io(_) => exit::FAILURE,
        }
    }
}

/// `JETRAO_THREADS`, if set to a positive integer.
pub fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("JETRAO_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("JETRAO_THREADS={v:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// `JETRAO_DETERMINISTIC=1`.
pub fn env_deterministic() -> bool {
    std::env::var("JETRAO_DETERMINISTIC").is_ok_and(|v| v.trim() == "1")
}
