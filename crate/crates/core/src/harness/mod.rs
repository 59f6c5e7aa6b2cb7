//! Configuration, scenario orchestration, sweeps and reports.

mod config;
mod report;
mod run;
mod sweep;

pub use config::{policy_warnings, Mode, ScenarioConfig, ADIABATIC_LIMIT};
pub use report::{report, write_report, Report, Speedup};
pub use run::{
    check, drives_csv, run, timeseries_csv, write_outputs, CheckReport, RunOutcome, Summary,
    DRIVES_SCHEMA, SUMMARY_SCHEMA, TIMESERIES_SCHEMA,
};
pub use sweep::{default_deltas, sweep_detuning, SweepResult, SweepSeries, SWEEP_SCHEMA};

use thiserror::Error;

use crate::drives::DriveError;
use crate::dynamics::DynamicsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("{context}: {source}")]
    Integration {
        context: String,
        #[source]
        source: DynamicsError,
    },
    #[error("{context}: {source}")]
    Drives {
        context: String,
        #[source]
        source: DriveError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for failed
    /// integrations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Integration { .. } | HarnessError::Drives { .. } => 3,
            HarnessError::Io { .. } | HarnessError::Other(_) => 1,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}
