//! Command-line driver for aggregation-diffusion experiments: config
//! parsing with located diagnostics, the subcommands and their artifacts.

pub mod commands;
pub mod config;
pub mod verify;

pub use config::{parse_config, ConfigError, Overrides};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A verdict or assertion did not come out as expected.
    pub const FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    /// The scheme broke one of its own invariants (mass, sign, finiteness).
    pub const INVARIANT: i32 = 3;
    /// The run terminated on the blow-up cap or the `dt_min` floor.
    pub const BLOWUP: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(ConfigError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{0}")]
    Failed(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Invariant(_) => exit::INVARIANT,
            CliError::Failed(_) | CliError::Io(_) => exit::FAILED,
        }
    }
}
