//! Reconstruction of the pulsed drive amplitudes that produce a prescribed
//! set of linearized couplings.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::dynamics::{SystemParams, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::ode::{self, DenseTrajectory, OdeError, Settings};
use crate::schedule::CouplingSource;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriveError {
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
    #[error("non-finite displacement derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },
    #[error("displacement integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisplacementState {
    pub alpha1: C64,
    pub alpha2: C64,
    pub beta: C64,
}

/// Target cavity displacements `alpha_i = G_i / g_i` and their time derivatives.
fn alphas(
    sched: &dyn CouplingSource,
    sys: &SystemParams,
    t: f64,
) -> Result<[(C64, C64); 2], DriveError> {
    let c = sched.couplings(t);
    let r = sched.rates(t);
    let (g1, dg1) = if sys.sta_enabled {
        (c.g1, r.g1)
    } else {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    };
    let split =
        |coupling: C64, rate: C64, single: f64, name: &str| -> Result<(C64, C64), DriveError> {
            if single > 0.0 {
                Ok((coupling / single, rate / single))
            } else if coupling.norm() > 0.0 || rate.norm() > 0.0 {
                Err(DriveError::Inconsistent(format!(
                    "{name} = 0 but the coupling it carries is nonzero at t = {t}"
                )))
            } else {
                Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)))
            }
        };
    let a1 = split(g1, dg1, sys.g1, "g1")?;
    let a2 = split(C64::new(c.g2, 0.0), C64::new(r.g2, 0.0), sys.g2, "g2")?;
    for (a, da) in [a1, a2] {
        if !(da.re.is_finite() && da.im.is_finite() && a.re.is_finite() && a.im.is_finite()) {
            return Err(DriveError::NonFiniteDerivative { t });
        }
    }
    Ok([a1, a2])
}

fn check_window(window: (f64, f64)) -> Result<(), DriveError> {
    let (t0, t1) = window;
    if t0.is_finite() && t1.is_finite() && t1 > t0 {
        Ok(())
    } else {
        Err(DriveError::InvalidWindow(t0, t1))
    }
}

/// Mechanical displacement `beta(t)` with dense output.
#[derive(Debug, Clone)]
pub struct BetaTrajectory {
    dense: DenseTrajectory,
}

impl BetaTrajectory {
    pub fn at(&self, t: f64) -> C64 {
        self.dense.eval(0, t)
    }

    pub fn span(&self) -> (f64, f64) {
        self.dense.span()
    }
}

/// Integrates `beta' = (-i omega_m - gamma_m/2) beta - i g1 |alpha1|^2 - i g2 |alpha2|^2`
/// from `beta = 0` at the window start.
pub fn beta_trajectory(
    sched: &dyn CouplingSource,
    sys: &SystemParams,
    window: (f64, f64),
    settings: &Settings,
) -> Result<BetaTrajectory, DriveError> {
    check_window(window)?;
    alphas(sched, sys, window.0)?;
    let mut failure = None;
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| match alphas(sched, sys, t) {
        Ok([(a1, _), (a2, _)]) => {
            dy[0] = C64::new(-0.5 * sys.gamma_m, -sys.omega_m) * y[0]
                - C64::i() * (sys.g1 * a1.norm_sqr() + sys.g2 * a2.norm_sqr());
        }
        Err(e) => {
            failure.get_or_insert(e);
            dy[0] = C64::new(0.0, 0.0);
        }
    };
    let mut settings = *settings;
    // Resolve the mechanical oscillation.
    settings.h_max = settings.h_max.min(0.5 / sys.omega_m);
    let mut dense = DenseTrajectory::default();
    let outcome = ode::integrate(
        rhs,
        window.0,
        window.1,
        &[C64::new(0.0, 0.0)],
        &settings,
        |s| dense.push(s),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    outcome?;
    if dense.is_empty() {
        return Err(DriveError::InvalidWindow(window.0, window.1));
    }
    Ok(BetaTrajectory { dense })
}

/// Drive amplitudes implied by a coupling schedule, evaluable at any time in
/// the window.
pub struct DriveModel<'a> {
    pub sched: &'a dyn CouplingSource,
    pub sys: SystemParams,
    pub beta: BetaTrajectory,
}

impl<'a> DriveModel<'a> {
    pub fn new(
        sched: &'a dyn CouplingSource,
        sys: &SystemParams,
        window: (f64, f64),
        settings: &Settings,
    ) -> Result<Self, DriveError> {
        let beta = beta_trajectory(sched, sys, window, settings)?;
        Ok(DriveModel {
            sched,
            sys: *sys,
            beta,
        })
    }

    pub fn displacement(&self, t: f64) -> Result<DisplacementState, DriveError> {
        let [(a1, _), (a2, _)] = alphas(self.sched, &self.sys, t)?;
        Ok(DisplacementState {
            alpha1: a1,
            alpha2: a2,
            beta: self.beta.at(t),
        })
    }

    /// `Omega_i = -i alpha_i' + (Delta_i + 2 g_i Re(beta) - i kappa_i/2) alpha_i + J alpha_j`.
    pub fn omegas(&self, t: f64) -> Result<(C64, C64), DriveError> {
        let s = &self.sys;
        let [(a1, da1), (a2, da2)] = alphas(self.sched, s, t)?;
        let j = self.sched.couplings(t).j;
        let re_beta = self.beta.at(t).re;
        let delta1 = s.omega_m;
        let delta2 = s.omega_m + s.delta;
        let i = C64::i();
        let o1 = -i * da1 + C64::new(delta1 + 2.0 * s.g1 * re_beta, -0.5 * s.kappa1) * a1 + j * a2;
        let o2 = -i * da2 + C64::new(delta2 + 2.0 * s.g2 * re_beta, -0.5 * s.kappa2) * a2 + j * a1;
        Ok((o1, o2))
    }

    /// Largest `2 g_i |Re beta| / Delta_i` over `times`.
    pub fn max_feedback_ratio(&self, times: &[f64]) -> f64 {
        let s = &self.sys;
        let d1 = s.omega_m;
        let d2 = s.omega_m + s.delta;
        times
            .iter()
            .map(|&t| {
                let rb = self.beta.at(t).re.abs();
                (2.0 * s.g1 * rb / d1.abs()).max(2.0 * s.g2 * rb / d2.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Drive amplitudes sampled on a uniform grid. `omega1` is absent when the
/// direct channel has no single-photon coupling (`g1 = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct DrivePair {
    pub times: Vec<f64>,
    pub omega1: Option<Vec<C64>>,
    pub omega2: Vec<C64>,
    pub beta: Vec<C64>,
}

impl DrivePair {
    pub fn max_amplitude(&self) -> f64 {
        let m2 = self.omega2.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let m1 = self
            .omega1
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        m1.max(m2)
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &C64| z.re.is_finite() && z.im.is_finite();
        self.omega2.iter().all(ok) && self.omega1.iter().flatten().all(ok)
    }
}

pub fn reconstruct_drives(
    sched: &dyn CouplingSource,
    sys: &SystemParams,
    window: (f64, f64),
    grid_points: usize,
) -> Result<DrivePair, DriveError> {
    let model = DriveModel::new(
        sched,
        sys,
        window,
        &Settings::with_tolerances(DEFAULT_RTOL, DEFAULT_ATOL),
    )?;
    let points = grid_points.max(2);
    let (t0, t1) = window;
    let times: Vec<f64> = (0..points)
        .map(|k| {
            if k + 1 == points {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (points - 1) as f64
            }
        })
        .collect();
    let mut omega1 = Vec::with_capacity(points);
    let mut omega2 = Vec::with_capacity(points);
    let mut beta = Vec::with_capacity(points);
    for &t in &times {
        let (o1, o2) = model.omegas(t)?;
        omega1.push(o1);
        omega2.push(o2);
        beta.push(model.beta.at(t));
    }
    Ok(DrivePair {
        times,
        omega1: if sys.g1 > 0.0 { Some(omega1) } else { None },
        omega2,
        beta,
    })
}
