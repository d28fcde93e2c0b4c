//! Command-line front end: analytic curves, simulations, curve comparison
//! and figure presets, all exchanged as CSV files.

use thiserror::Error;

pub mod args;
pub mod commands;
pub mod csvio;
pub mod plot;
pub mod preset;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("largest gap {max_gap:.6} exceeds tolerance {tolerance}")]
    Tolerance { max_gap: f64, tolerance: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for a failed tolerance check, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance { .. } => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => CliError::Io(io),
                _ => unreachable!("checked by is_io_error"),
            }
        } else {
            CliError::Usage(format!("CSV: {e}"))
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),+) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Usage(e.to_string())
            }
        })+
    };
}

usage_from!(
    onebit_sense::ConfigError,
    onebit_sense::AnalyticError,
    onebit_sense::McError,
    onebit_sense::ModelError,
    onebit_sense::SignalError
);
