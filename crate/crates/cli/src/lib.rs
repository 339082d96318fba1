//! Command-line driver: `solve`, `convergence` and `oracle` runs writing CSV,
//! VTK and SVG artifacts.

pub mod config;
pub mod output;
pub mod run;

use std::fmt;

use convdiff_core::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    /// File-system failures count as configuration errors (bad `--out`).
    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn config_from(e: Error) -> Self {
        CliError::config(e.to_string())
    }

    /// An error raised while building or solving the discrete problem.
    pub fn solver(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::UnsupportedDegree(_) | Error::UnsupportedQuadrature(_) | Error::NonFinite(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_SOLVER,
        };
        CliError { code, message: format!("solver: {e}") }
    }

    /// An error raised while evaluating the reference solution.
    pub fn oracle(e: Error) -> Self {
        CliError { code: EXIT_ORACLE, message: format!("oracle: {e}") }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
