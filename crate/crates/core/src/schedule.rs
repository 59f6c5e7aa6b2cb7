//! Time-dependent couplings fed to the dynamics and drive reconstruction.

use num_complex::Complex64 as C64;

use crate::protocols::{AngleSample, ProtocolError, ProtocolParams};

/// Instantaneous coupling strengths in the frame rotating at `omega_m`.
///
/// `g1` is the coefficient of `a1† b` in the Hamiltonian (the direct
/// cavity–mechanics channel); the conjugate multiplies `b† a1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Couplings {
    pub j: f64,
    pub g2: f64,
    pub g1: C64,
}

pub trait CouplingSource: Send + Sync {
    fn couplings(&self, t: f64) -> Couplings;

    /// Time derivatives of the couplings. The default is a fourth-order
    /// central difference with step `1e-4 * time_scale()`.
    fn rates(&self, t: f64) -> Couplings {
        let h = 1e-4 * self.time_scale();
        let at = |dt: f64| self.couplings(t + dt);
        let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
        let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * h);
        Couplings {
            j: d(m2.j, m1.j, p1.j, p2.j),
            g2: d(m2.g2, m1.g2, p1.g2, p2.g2),
            g1: (m2.g1 - m1.g1 * 8.0 + p1.g1 * 8.0 - p2.g1) / (12.0 * h),
        }
    }

    /// Characteristic time over which the couplings change.
    fn time_scale(&self) -> f64 {
        1.0
    }

    /// The pulse protocol behind the couplings, if there is one.
    fn protocol(&self) -> Option<&ProtocolParams> {
        None
    }
}

/// Constant couplings.
impl CouplingSource for Couplings {
    fn couplings(&self, _t: f64) -> Couplings {
        *self
    }

    fn rates(&self, _t: f64) -> Couplings {
        Couplings::default()
    }
}

/// Couplings generated by a pulse protocol. The counterdiabatic channel is
/// always offered as `g1 = i θ̇(t)`; whether it is switched on is decided by
/// the system parameters of the consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSchedule {
    pub protocol: ProtocolParams,
}

impl CouplingSchedule {
    pub fn new(protocol: ProtocolParams) -> Self {
        CouplingSchedule { protocol }
    }

    pub fn sample(&self, t: f64, delta: f64) -> Result<AngleSample, ProtocolError> {
        self.protocol.sample(t, delta)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.protocol.t_start, self.protocol.t_end)
    }
}

impl CouplingSource for CouplingSchedule {
    fn couplings(&self, t: f64) -> Couplings {
        let (j, g2) = self.protocol.couplings(t);
        Couplings {
            j,
            g2,
            g1: C64::new(0.0, self.protocol.theta_rate(t)),
        }
    }

    fn rates(&self, t: f64) -> Couplings {
        let d = self.protocol.derivatives(t);
        Couplings {
            j: d.dj,
            g2: d.dg2,
            g1: C64::new(0.0, self.protocol.theta_accel(t)),
        }
    }

    fn time_scale(&self) -> f64 {
        self.protocol.width
    }

    fn protocol(&self) -> Option<&ProtocolParams> {
        Some(&self.protocol)
    }
}

/// Wraps a closure as a coupling source.
pub struct FnSchedule<F> {
    f: F,
    scale: f64,
}

impl<F> FnSchedule<F>
where
    F: Fn(f64) -> Couplings + Send + Sync,
{
    pub fn new(f: F, time_scale: f64) -> Self {
        FnSchedule {
            f,
            scale: time_scale,
        }
    }
}

impl<F> CouplingSource for FnSchedule<F>
where
    F: Fn(f64) -> Couplings + Send + Sync,
{
    fn couplings(&self, t: f64) -> Couplings {
        (self.f)(t)
    }

    fn time_scale(&self) -> f64 {
        self.scale
    }
}
