//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use stacool::drives::DriveModel;
use stacool::dynamics::{RunResult, SystemParams};
use stacool::harness::ScenarioConfig;
use stacool::ode::{integrate, Settings};
use stacool::protocols::{Family, ProtocolParams};
use stacool::scenarios;
use stacool::schedule::{CouplingSchedule, CouplingSource};
use stacool::spectral::{eigensystem, CouplingMatrix3};
use stacool::C64;

/// Gaussian STA pulses with weak dissipation, small enough for a Fock
/// truncation.
pub fn small_scale(sta: bool, cr: bool) -> (SystemParams, CouplingSchedule, (f64, f64)) {
    let p = ProtocolParams::with_defaults(Family::Gaussian, 0.1, 16.0)
        .unwrap()
        .with_window(0.0, 77.0)
        .unwrap();
    let sys = SystemParams {
        kappa1: 0.02,
        kappa2: 0.02,
        gamma_m: 3e-6,
        n_bar: 10.0,
        include_counter_rotating: cr,
        sta_enabled: sta,
        ..SystemParams::default()
    };
    (sys, CouplingSchedule::new(p), (0.0, 77.0))
}

/// Largest occupation difference between two runs on the same grid.
pub fn worst_gap(a: &RunResult, b: &RunResult) -> f64 {
    (0..a.times.len())
        .map(|k| {
            (a.p1[k] - b.p1[k])
                .abs()
                .max((a.p2[k] - b.p2[k]).abs())
                .max((a.pb[k] - b.pb[k]).abs())
        })
        .fold(0.0, f64::max)
}

/// Five-point central difference of `atan2(J, G2)`. Close to pi/2 the
/// complement `atan2(G2, J)` is differenced instead so the result keeps its
/// relative precision.
pub fn numeric_theta_dot(p: &ProtocolParams, t: f64, h: f64) -> f64 {
    let (j, g2) = p.couplings(t);
    let angle = |s: f64| {
        let (j, g2) = p.couplings(s);
        j.atan2(g2)
    };
    let complement = |s: f64| {
        let (j, g2) = p.couplings(s);
        -g2.atan2(j)
    };
    let stencil = |f: &dyn Fn(f64) -> f64| {
        (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
    };
    if j > g2 {
        stencil(&complement)
    } else {
        stencil(&angle)
    }
}

/// Integrates `i psi' = H(t) psi` from the dark state and returns the worst
/// fidelity with the instantaneous dark state.
pub fn transport(p: &ProtocolParams, delta: f64, h: impl Fn(f64) -> CouplingMatrix3) -> f64 {
    let dark = |t: f64| {
        let (j, g2) = p.couplings(t);
        eigensystem(j, g2, delta).unwrap().lambda0
    };
    let psi0 = dark(p.t_start).map(|x| C64::new(x, 0.0));
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let out = h(t).apply(&[y[0], y[1], y[2]]);
        for i in 0..3 {
            dy[i] = -C64::i() * out[i];
        }
    };
    let mut worst: f64 = 1.0;
    let settings = Settings::with_tolerances(1e-12, 1e-14);
    integrate(rhs, p.t_start, p.t_end, &psi0, &settings, |step| {
        let d = dark(step.t1);
        let overlap: C64 = (0..3).map(|i| step.y1[i] * d[i]).sum();
        worst = worst.min(overlap.norm());
    })
    .unwrap();
    worst
}

/// Every preset family as closed and dissipative STIRAP and STA.
pub fn drive_cases() -> Vec<ScenarioConfig> {
    let mut v = Vec::new();
    for family in Family::ALL {
        let mut stirap = scenarios::stirap(family);
        v.push(stirap.clone());
        stirap.system = SystemParams::default();
        v.push(stirap);
        v.push(scenarios::sta(family, false));
        v.push(scenarios::sta(family, true));
    }
    v
}

/// Drives the displacement equations forward with the reconstructed
/// amplitudes and returns the worst deviation of `g_i alpha_i` from the
/// target couplings, relative to the peak coupling.
pub fn round_trip_error(cfg: &ScenarioConfig) -> f64 {
    let sys = cfg.system;
    let sched = CouplingSchedule::new(cfg.protocol);
    let window = cfg.window();
    let model = DriveModel::new(
        &sched,
        &sys,
        window,
        &Settings::with_tolerances(1e-12, 1e-14),
    )
    .unwrap();
    let target = |t: f64| {
        let c = sched.couplings(t);
        let g1 = if sys.sta_enabled {
            c.g1
        } else {
            C64::new(0.0, 0.0)
        };
        (g1, C64::new(c.g2, 0.0))
    };
    let (g1_0, g2_0) = target(window.0);
    let y0 = [g1_0 / sys.g1, g2_0 / sys.g2, C64::new(0.0, 0.0)];
    let i = C64::i();
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let (o1, o2) = model.omegas(t).unwrap();
        let j = sched.couplings(t).j;
        let rb = y[2].re;
        let a1 = C64::new(sys.omega_m + 2.0 * sys.g1 * rb, -0.5 * sys.kappa1);
        let a2 = C64::new(
            sys.omega_m + sys.delta + 2.0 * sys.g2 * rb,
            -0.5 * sys.kappa2,
        );
        dy[0] = i * (o1 - a1 * y[0] - j * y[1]);
        dy[1] = i * (o2 - a2 * y[1] - j * y[0]);
        dy[2] = C64::new(-0.5 * sys.gamma_m, -sys.omega_m) * y[2]
            - i * (sys.g1 * y[0].norm_sqr() + sys.g2 * y[1].norm_sqr());
    };
    let settings = Settings {
        h_max: 0.25,
        ..Settings::with_tolerances(1e-12, 1e-12)
    };
    let mut worst: f64 = 0.0;
    integrate(rhs, window.0, window.1, &y0, &settings, |step| {
        let (g1, g2) = target(step.t1);
        let e1 = (step.y1[0] * sys.g1 - g1).norm();
        let e2 = (step.y1[1] * sys.g2 - g2).norm();
        worst = worst.max(e1.max(e2));
    })
    .unwrap();
    worst / cfg.protocol.peak
}
