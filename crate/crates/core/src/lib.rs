//! Ground-state cooling of a mechanical resonator through two coupled cavity
//! modes, driven by STIRAP pulses with optional counterdiabatic assistance.

pub mod drives;
pub mod dynamics;
pub mod harness;
pub mod ode;
pub mod protocols;
pub mod scenarios;
pub mod schedule;
pub mod spectral;

pub use num_complex::Complex64 as C64;
