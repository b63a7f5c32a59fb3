//! File formats and commands behind the `hcvdyn` binary.
//!
//! Scenario and sweep files are plain `key = value` text. Every command
//! returns a [`Status`] or a [`CliError`]; both map onto fixed exit codes.

pub mod commands;
pub mod kv;
pub mod output;
pub mod scenario;
pub mod sweep_file;

use std::io;
use std::path::PathBuf;

pub use kv::{ParseError, ParseErrorKind};
pub use scenario::{parse_scenario, render_scenario, IntegratorOverrides, MethodKind, ScenarioFile};
pub use sweep_file::parse_sweep_spec;

/// Successful outcomes. Errors carry their own codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A checked invariant or sign condition failed.
    Violation,
    /// Nothing failed, but a stated hypothesis does not hold.
    Advisory,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 2,
            Status::Advisory => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Model(#[from] hcv_dynamics::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 1,
            CliError::Model(hcv_dynamics::Error::Integration { .. }) => 4,
            CliError::Model(_) => 1,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Shortest decimal text that parses back to exactly `x`. Plain notation for
/// moderate magnitudes, scientific otherwise.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
