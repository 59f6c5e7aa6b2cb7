//! Exact second-moment dynamics of the linearized three-mode system, plus a
//! truncated Fock-space Lindblad integrator used as an independent check.

mod fock;
mod moments;
mod run;

pub use fock::{fock_oracle, fock_oracle_from_density, FockDims, FockSpace};
pub use moments::{initial_state, moment_rhs, Moment, MomentState, SystemParams};
pub use run::{
    figures_of_merit, integrate, speedup, Diagnostics, FiguresOfMerit, IntegrateOptions, RunResult,
    DEFAULT_ATOL, DEFAULT_RTOL,
};

use thiserror::Error;

use crate::ode::OdeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("non-finite moment state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid initial occupation {0}; it must be finite and >= 0")]
    NegativeOccupation(f64),
    #[error("invalid system parameters: {0}")]
    InvalidSystem(String),
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("Fock truncation too small: top-level population {population:e} at t = {t}")]
    Truncation { t: f64, population: f64 },
    #[error("{0}")]
    Unsupported(String),
}
