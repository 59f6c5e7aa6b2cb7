use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::schedule::{CouplingSource, Couplings};

/// Physical parameters of the linearized system, in units of `omega_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_m: f64,
    /// Detuning of `a2` from the mechanical frequency.
    pub delta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma_m: f64,
    pub n_bar: f64,
    /// Single-photon couplings, used only for drive reconstruction.
    pub g1: f64,
    pub g2: f64,
    pub include_counter_rotating: bool,
    /// Switches on the direct `a1`–`b` counterdiabatic channel.
    pub sta_enabled: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            omega_m: 1.0,
            delta: 0.0,
            kappa1: 0.02,
            kappa2: 0.02,
            gamma_m: 3e-6,
            n_bar: 1e4,
            g1: 6e-5,
            g2: 6e-5,
            include_counter_rotating: true,
            sta_enabled: false,
        }
    }
}

impl SystemParams {
    /// No dissipation and no thermal bath.
    pub fn closed() -> Self {
        SystemParams {
            kappa1: 0.0,
            kappa2: 0.0,
            gamma_m: 0.0,
            n_bar: 0.0,
            ..SystemParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let mut bad = Vec::new();
        if !(self.omega_m.is_finite() && self.omega_m > 0.0) {
            bad.push(format!("omega_m = {} must be > 0", self.omega_m));
        }
        if !self.delta.is_finite() {
            bad.push(format!("delta = {} must be finite", self.delta));
        }
        for (name, v) in [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma_m", self.gamma_m),
            ("n_bar", self.n_bar),
            ("g1", self.g1),
            ("g2", self.g2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(DynamicsError::InvalidSystem(bad.join("; ")))
        }
    }
}

/// Names of the twelve tracked second moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    /// `<a1† a1>`
    N1 = 0,
    /// `<a2† a2>`
    N2,
    /// `<b† b>`
    Nb,
    /// `<a1† a2>`
    A1A2,
    /// `<a1† b>`
    A1B,
    /// `<a2† b>`
    A2B,
    /// `<a1† a2†>`
    P12,
    /// `<a1† b†>`
    P1B,
    /// `<a2† b†>`
    P2B,
    /// `<a1† a1†>`
    P11,
    /// `<a2† a2†>`
    P22,
    /// `<b† b†>`
    Pbb,
}

impl Moment {
    pub const ALL: [Moment; 12] = [
        Moment::N1,
        Moment::N2,
        Moment::Nb,
        Moment::A1A2,
        Moment::A1B,
        Moment::A2B,
        Moment::P12,
        Moment::P1B,
        Moment::P2B,
        Moment::P11,
        Moment::P22,
        Moment::Pbb,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Mode indices `(j, k)` with 0 = a1, 1 = a2, 2 = b, and whether both
    /// operators are creation operators.
    pub fn modes(self) -> (usize, usize, bool) {
        match self {
            Moment::N1 => (0, 0, false),
            Moment::N2 => (1, 1, false),
            Moment::Nb => (2, 2, false),
            Moment::A1A2 => (0, 1, false),
            Moment::A1B => (0, 2, false),
            Moment::A2B => (1, 2, false),
            Moment::P12 => (0, 1, true),
            Moment::P1B => (0, 2, true),
            Moment::P2B => (1, 2, true),
            Moment::P11 => (0, 0, true),
            Moment::P22 => (1, 1, true),
            Moment::Pbb => (2, 2, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentState {
    pub m: [C64; 12],
}

impl MomentState {
    pub fn get(&self, which: Moment) -> C64 {
        self.m[which.index()]
    }

    pub fn set(&mut self, which: Moment, v: C64) {
        self.m[which.index()] = v;
    }

    pub fn p1(&self) -> f64 {
        self.m[0].re
    }

    pub fn p2(&self) -> f64 {
        self.m[1].re
    }

    pub fn pb(&self) -> f64 {
        self.m[2].re
    }

    pub fn from_slice(y: &[C64]) -> Self {
        let mut m = [C64::new(0.0, 0.0); 12];
        m.copy_from_slice(&y[..12]);
        MomentState { m }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Thermal mechanics with `n0` phonons and empty cavities.
pub fn initial_state(n0: f64) -> Result<MomentState, DynamicsError> {
    if !(n0.is_finite() && n0 >= 0.0) {
        return Err(DynamicsError::NegativeOccupation(n0));
    }
    let mut s = MomentState::default();
    s.set(Moment::Nb, C64::new(n0, 0.0));
    Ok(s)
}

/// Time derivative of the moment vector.
pub fn moment_rhs(
    t: f64,
    state: &MomentState,
    sys: &SystemParams,
    sched: &dyn CouplingSource,
) -> Result<MomentState, DynamicsError> {
    let mut out = MomentState::default();
    rhs_into(t, &state.m, sys, sched.couplings(t), &mut out.m);
    if !out.is_finite() {
        return Err(DynamicsError::NonFinite { t });
    }
    Ok(out)
}

pub(crate) fn rhs_into(t: f64, y: &[C64], sys: &SystemParams, c: Couplings, out: &mut [C64]) {
    let i = C64::i();
    let (n1, n2, nb) = (y[0], y[1], y[2]);
    let (a12, a1b, a2b) = (y[3], y[4], y[5]);
    let (p12, p1b, p2b) = (y[6], y[7], y[8]);
    let (p11, p22, pbb) = (y[9], y[10], y[11]);

    let j = C64::new(c.j, 0.0);
    let g = C64::new(c.g2, 0.0);
    let g1 = if sys.sta_enabled {
        c.g1
    } else {
        C64::new(0.0, 0.0)
    };
    let g1c = g1.conj();
    let e = if sys.include_counter_rotating {
        C64::from_polar(1.0, 2.0 * sys.omega_m * t)
    } else {
        C64::new(0.0, 0.0)
    };
    let ge = g * e;
    let gec = g * e.conj();
    let d = sys.delta;
    let (k1, k2, gm) = (sys.kappa1, sys.kappa2, sys.gamma_m);

    out[0] = i * j * (a12.conj() - a12) + i * g1c * a1b.conj() - i * g1 * a1b - k1 * n1;
    out[1] = i * j * (a12 - a12.conj()) + i * g * (a2b.conj() - a2b) - i * ge * p2b
        + i * gec * p2b.conj()
        - k2 * n2;
    out[2] = i * g * (a2b - a2b.conj()) - i * ge * p2b + i * gec * p2b.conj()
        - i * g1c * a1b.conj()
        + i * g1 * a1b
        - gm * nb
        + gm * sys.n_bar;
    out[3] = -(i * d + 0.5 * (k1 + k2)) * a12 + i * j * (n2 - n1) - i * g * a1b - i * ge * p1b
        + i * g1c * a2b.conj();
    out[4] = i * j * a2b - i * g * a12 - i * ge * p12 + i * g1c * (nb - n1) - 0.5 * (k1 + gm) * a1b;
    out[5] = (i * d - 0.5 * (k2 + gm)) * a2b + i * j * a1b + i * g * (nb - n2) - i * ge * p22
        + i * gec * pbb.conj()
        - i * g1c * a12.conj();
    out[6] = (i * d - 0.5 * (k1 + k2)) * p12
        + i * j * (p11 + p22)
        + i * g * p1b
        + i * gec * a1b
        + i * g1c * p2b;
    out[7] = i * j * p2b + i * g * p12 + i * gec * a12 + i * g1c * pbb + i * g1 * p11
        - 0.5 * (k1 + gm) * p1b;
    out[8] = (i * d - 0.5 * (k2 + gm)) * p2b
        + i * j * p1b
        + i * g * (p22 + pbb)
        + i * gec * (n2 + nb + 1.0)
        + i * g1 * p12;
    out[9] = 2.0 * i * (j * p12 + g1c * p1b) - k1 * p11;
    out[10] = (2.0 * i * d - k2) * p22 + 2.0 * i * (j * p12 + g * p2b + gec * a2b);
    out[11] = 2.0 * i * (g * p2b + gec * a2b.conj() + g1 * p1b) - gm * pbb;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_rejects_negative() {
        assert!(matches!(
            initial_state(-1.0),
            Err(DynamicsError::NegativeOccupation(_))
        ));
        assert!(initial_state(f64::NAN).is_err());
        let s = initial_state(3.0).unwrap();
        assert_eq!(s.pb(), 3.0);
        assert_eq!(s.p1() + s.p2(), 0.0);
    }

    #[test]
    fn vacuum_is_fixed_without_bath_or_counter_rotation() {
        let sys = SystemParams {
            include_counter_rotating: false,
            ..SystemParams::closed()
        };
        let c = Couplings {
            j: 0.1,
            g2: 0.05,
            g1: C64::new(0.0, 0.02),
        };
        let d = moment_rhs(1.0, &MomentState::default(), &sys, &c).unwrap();
        assert!(d.m.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn counter_rotating_terms_pump_vacuum() {
        let sys = SystemParams::closed();
        let c = Couplings {
            j: 0.0,
            g2: 0.1,
            g1: C64::new(0.0, 0.0),
        };
        let d = moment_rhs(0.0, &MomentState::default(), &sys, &c).unwrap();
        // <a2† b†> is driven by the vacuum term i G e^{-2it}.
        assert!((d.get(Moment::P2B) - C64::new(0.0, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn thermal_bath_heats_mechanics() {
        let sys = SystemParams {
            gamma_m: 1e-3,
            n_bar: 10.0,
            ..SystemParams::closed()
        };
        let d = moment_rhs(
            0.0,
            &initial_state(4.0).unwrap(),
            &sys,
            &Couplings::default(),
        )
        .unwrap();
        assert!((d.get(Moment::Nb).re - 1e-3 * 6.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let mut s = MomentState::default();
        s.set(Moment::N1, C64::new(f64::NAN, 0.0));
        let c = Couplings {
            j: 0.1,
            ..Couplings::default()
        };
        assert!(matches!(
            moment_rhs(0.0, &s, &SystemParams::default(), &c),
            Err(DynamicsError::NonFinite { .. })
        ));
    }
}
