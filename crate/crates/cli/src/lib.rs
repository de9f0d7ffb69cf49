//! Library backing the `egkcap` binary: configuration handling, table
//! rendering, grid runners, and the validation suite. Kept as a library
//! so the integration tests drive the same code paths as the binary.

pub mod config;
pub mod output;
pub mod run;
pub mod validate;

/// Failures surfaced to the user, split by exit code: configuration
/// problems exit 2, numerical problems exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}
