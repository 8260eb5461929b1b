//! Library side of the `pilotwave` command: scenario configs, runners, and
//! manifests. The binary in `main.rs` is a thin argument parser over these.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod runner;

use std::fmt;

/// Failure classes with distinct exit codes: 2 for config/usage problems,
/// 3 for numerical aborts (singularities, undefined flow).
#[derive(Debug)]
pub enum CliError {
    Config(Vec<String>),
    Numerical(pilotwave::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(problems) => {
                writeln!(f, "invalid configuration:")?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
            CliError::Numerical(e) => write!(f, "numerical abort: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}
