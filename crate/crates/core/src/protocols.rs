//! The four counterintuitively ordered coupling protocols and the mixing
//! angles derived from them.
//!
//! Every protocol produces a photon-hopping strength `J(t)` that precedes the
//! linearized optomechanical coupling `G2(t)`. All times are in units of
//! `1/omega_m` and all strengths in units of `omega_m`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed when checking that a time lies inside the window.
const WINDOW_SLACK: f64 = 1e-9;

/// Offset of the Vitanov logistic ramp, in units of the width `T`.
const VITANOV_OFFSET: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("time {t} lies outside the simulation window [{t_start}, {t_end}]")]
    OutOfWindow { t: f64, t_start: f64, t_end: f64 },
    #[error("unknown protocol family `{0}` (expected gaussian, sin4, invsqrt or vitanov)")]
    UnknownFamily(String),
    #[error("invalid protocol parameters: {0}")]
    Invalid(String),
    #[error("both couplings vanish at t = {t}; the mixing angles are undefined")]
    Singular { t: f64 },
}

/// Pulse family, one per row of the protocol table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Sin4,
    InvSqrt,
    Vitanov,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Gaussian,
        Family::Sin4,
        Family::InvSqrt,
        Family::Vitanov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Sin4 => "sin4",
            Family::InvSqrt => "invsqrt",
            Family::Vitanov => "vitanov",
        }
    }

    /// Whether the delay `xi` enters the pulse shapes.
    pub fn uses_delay(self) -> bool {
        matches!(self, Family::Gaussian | Family::Sin4)
    }

    /// Whether the time shift `t_f` enters the pulse shapes.
    pub fn uses_shift(self) -> bool {
        matches!(self, Family::Gaussian | Family::InvSqrt)
    }

    /// Delay and shift conventions that keep the counterintuitive ordering
    /// well satisfied at both ends of the default window.
    pub fn default_shape(self, width: f64) -> (f64, f64) {
        match self {
            Family::Gaussian => (0.8 * width, 3.0 * width),
            Family::Sin4 => (0.5 * width, 0.0),
            Family::InvSqrt => (0.0, 20.0 * width),
            Family::Vitanov => (0.0, 0.0),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(Family::Gaussian),
            "sin4" | "sin^4" => Ok(Family::Sin4),
            "invsqrt" | "inv_sqrt" | "()^-1/2" => Ok(Family::InvSqrt),
            "vitanov" => Ok(Family::Vitanov),
            other => Err(ProtocolError::UnknownFamily(other.to_string())),
        }
    }
}

/// Default simulation window for a family.
///
/// Gaussian and inverse-square-root pulses are symmetric about `t_f`, so the
/// window is `[0, 2 t_f]`. The sin⁴ pair is cut where `J` reaches zero at the
/// end of its first lobe and the Vitanov ramp is run to `20 T`.
pub fn window_defaults(family: Family, width: f64, delay: f64, shift: f64) -> (f64, f64) {
    match family {
        Family::Gaussian | Family::InvSqrt => (0.0, 2.0 * shift),
        Family::Sin4 => (0.0, width - delay),
        Family::Vitanov => (0.0, 20.0 * width),
    }
}

/// Coupling values with their first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseDerivatives {
    pub j: f64,
    pub g2: f64,
    pub dj: f64,
    pub dg2: f64,
    pub ddj: f64,
    pub ddg2: f64,
}

/// Instantaneous snapshot of couplings, mixing angles and the adiabatic ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSample {
    pub t: f64,
    pub j: f64,
    pub g2: f64,
    pub g0: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub family: Family,
    /// Peak coupling strength `g`.
    pub peak: f64,
    /// Pulse width `T`.
    pub width: f64,
    /// Pulse delay `xi` (Gaussian and sin⁴ only).
    pub delay: f64,
    /// Time shift `t_f` (Gaussian and inverse-square-root only).
    pub shift: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl ProtocolParams {
    /// Builds a protocol with the conventional delay/shift for the family and
    /// its default window.
    pub fn with_defaults(family: Family, peak: f64, width: f64) -> Result<Self, ProtocolError> {
        let (delay, shift) = family.default_shape(width);
        let (t_start, t_end) = window_defaults(family, width, delay, shift);
        let p = ProtocolParams {
            family,
            peak,
            width,
            delay,
            shift,
            t_start,
            t_end,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same protocol with a different window.
    pub fn with_window(mut self, t_start: f64, t_end: f64) -> Result<Self, ProtocolError> {
        self.t_start = t_start;
        self.t_end = t_end;
        self.validate()?;
        Ok(self)
    }

    /// Structural checks that must hold for the closed forms to make sense.
    pub fn validate_shape(&self) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::Invalid(msg));
        if !(self.peak.is_finite() && self.peak > 0.0) {
            return bad(format!(
                "peak coupling g must be positive, got {}",
                self.peak
            ));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return bad(format!(
                "pulse width T must be positive, got {}",
                self.width
            ));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_start < 0.0 {
            return bad(format!("window start must be >= 0, got {}", self.t_start));
        }
        if self.t_end <= self.t_start {
            return bad(format!(
                "window end {} must exceed start {}",
                self.t_end, self.t_start
            ));
        }
        match self.family {
            Family::Gaussian if self.delay.is_nan() || self.delay <= 0.0 => bad(format!(
                "gaussian delay xi must be positive, got {}",
                self.delay
            )),
            Family::Sin4 if !(self.delay > 0.0 && self.delay < self.width) => bad(format!(
                "sin4 delay xi must lie in (0, T), got {}",
                self.delay
            )),
            Family::Sin4 if self.t_end > self.width - self.delay + WINDOW_SLACK => bad(format!(
                "sin4 window end {} exceeds T - xi = {}; the pulses would leave their first lobe",
                self.t_end,
                self.width - self.delay
            )),
            _ => Ok(()),
        }
    }

    /// Full validation, including the counterintuitive-ordering ratios at the
    /// window edges (`J/G2 >= 1e3` at the start, `<= 1e-2` at the end).
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.validate_shape()?;
        let start = self.coupling_ratio(self.t_start);
        let end = self.coupling_ratio(self.t_end);
        if start < 1e3 {
            return Err(ProtocolError::Invalid(format!(
                "J/G2 at window start is {start:.3e}; counterintuitive ordering needs >= 1e3"
            )));
        }
        if end > 1e-2 {
            return Err(ProtocolError::Invalid(format!(
                "J/G2 at window end is {end:.3e}; counterintuitive ordering needs <= 1e-2"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start - WINDOW_SLACK && t <= self.t_end + WINDOW_SLACK
    }

    fn check_window(&self, t: f64) -> Result<(), ProtocolError> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(ProtocolError::OutOfWindow {
                t,
                t_start: self.t_start,
                t_end: self.t_end,
            })
        }
    }

    /// `(J, G2)` at time `t`, restricted to the window.
    pub fn pulse_pair(&self, t: f64) -> Result<(f64, f64), ProtocolError> {
        self.check_window(t)?;
        Ok(self.couplings(t))
    }

    /// `(J, G2)` without the window check.
    pub fn couplings(&self, t: f64) -> (f64, f64) {
        let g = self.peak;
        let w = self.width;
        match self.family {
            Family::Gaussian => {
                let u = (t - self.shift + self.delay) / w;
                let v = (t - self.shift - self.delay) / w;
                (g * (-u * u).exp(), g * (-v * v).exp())
            }
            Family::Sin4 => {
                let sj = (PI * (t + self.delay) / w).sin();
                let sg = (PI * t / w).sin();
                (g * sj.powi(4), g * sg.powi(4))
            }
            Family::InvSqrt => {
                let x = (t - self.shift) / w;
                (g / (1.0 + x.exp()).sqrt(), g / (1.0 + (-x).exp()).sqrt())
            }
            Family::Vitanov => {
                let half_angle = FRAC_PI_2 * self.vitanov_ramp(t);
                (g * half_angle.cos(), g * half_angle.sin())
            }
        }
    }

    /// Logistic ramp `e^{t/T} / (e^{t/T} + e^{10})` written to avoid overflow.
    fn vitanov_ramp(&self, t: f64) -> f64 {
        1.0 / (1.0 + (VITANOV_OFFSET - t / self.width).exp())
    }

    /// `J/G2`, infinite where `G2` vanishes.
    pub fn coupling_ratio(&self, t: f64) -> f64 {
        let (j, g2) = self.couplings(t);
        if g2 == 0.0 {
            f64::INFINITY
        } else {
            j / g2
        }
    }

    /// Mixing angle `theta = atan2(J, G2)` in `[0, pi/2]`.
    pub fn mixing_theta(&self, t: f64) -> Result<f64, ProtocolError> {
        let (j, g2) = self.pulse_pair(t)?;
        Ok(j.atan2(g2))
    }

    /// Closed-form `d theta / dt` for the family. Never positive.
    pub fn theta_dot(&self, t: f64) -> Result<f64, ProtocolError> {
        self.check_window(t)?;
        Ok(self.theta_rate(t))
    }

    /// Closed-form `d theta / dt` without the window check.
    pub fn theta_rate(&self, t: f64) -> f64 {
        let w = self.width;
        match self.family {
            Family::Gaussian => {
                let u = 4.0 * self.delay * (t - self.shift) / (w * w);
                -2.0 * self.delay / (w * w * u.cosh())
            }
            Family::Sin4 => {
                let a = (PI * t / w).sin();
                let b = (PI * (t + self.delay) / w).sin();
                let den = a.powi(8) + b.powi(8);
                if den == 0.0 {
                    return 0.0;
                }
                -4.0 * PI / w * (PI * self.delay / w).sin() * a.powi(3) * b.powi(3) / den
            }
            Family::InvSqrt => -1.0 / (4.0 * w * ((t - self.shift) / (2.0 * w)).cosh()),
            Family::Vitanov => {
                let u = self.vitanov_ramp(t);
                -PI / (2.0 * w) * u * (1.0 - u)
            }
        }
    }

    /// Couplings with analytic first and second derivatives.
    pub fn derivatives(&self, t: f64) -> PulseDerivatives {
        let g = self.peak;
        let w = self.width;
        match self.family {
            Family::Gaussian => {
                let u = (t - self.shift + self.delay) / w;
                let v = (t - self.shift - self.delay) / w;
                let j = g * (-u * u).exp();
                let g2 = g * (-v * v).exp();
                PulseDerivatives {
                    j,
                    g2,
                    dj: -2.0 * u / w * j,
                    dg2: -2.0 * v / w * g2,
                    ddj: (4.0 * u * u - 2.0) / (w * w) * j,
                    ddg2: (4.0 * v * v - 2.0) / (w * w) * g2,
                }
            }
            Family::Sin4 => {
                let k = PI / w;
                let (sj, cj) = (k * (t + self.delay)).sin_cos();
                let (sg, cg) = (k * t).sin_cos();
                let first = |s: f64, c: f64| 4.0 * g * k * s.powi(3) * c;
                let second = |s: f64, c: f64| 4.0 * g * k * k * (3.0 * s * s * c * c - s.powi(4));
                PulseDerivatives {
                    j: g * sj.powi(4),
                    g2: g * sg.powi(4),
                    dj: first(sj, cj),
                    dg2: first(sg, cg),
                    ddj: second(sj, cj),
                    ddg2: second(sg, cg),
                }
            }
            Family::InvSqrt => {
                // f(x) = (1 + e^x)^(-1/2); J = g f(x), G2 = g f(-x).
                let x = (t - self.shift) / w;
                let f = |x: f64| 1.0 / (1.0 + x.exp()).sqrt();
                let df = |x: f64| {
                    let e = x.exp();
                    -0.5 * e * (1.0 + e).powf(-1.5)
                };
                let ddf = |x: f64| {
                    let e = x.exp();
                    -0.5 * e * (1.0 + e).powf(-1.5) + 0.75 * e * e * (1.0 + e).powf(-2.5)
                };
                PulseDerivatives {
                    j: g * f(x),
                    g2: g * f(-x),
                    dj: g * df(x) / w,
                    dg2: -g * df(-x) / w,
                    ddj: g * ddf(x) / (w * w),
                    ddg2: g * ddf(-x) / (w * w),
                }
            }
            Family::Vitanov => {
                let u = self.vitanov_ramp(t);
                let du = u * (1.0 - u) / w;
                let ddu = du * (1.0 - 2.0 * u) / w;
                let (s, c) = (FRAC_PI_2 * u).sin_cos();
                PulseDerivatives {
                    j: g * c,
                    g2: g * s,
                    dj: -g * FRAC_PI_2 * s * du,
                    dg2: g * FRAC_PI_2 * c * du,
                    ddj: -g * FRAC_PI_2 * (FRAC_PI_2 * c * du * du + s * ddu),
                    ddg2: g * FRAC_PI_2 * (-FRAC_PI_2 * s * du * du + c * ddu),
                }
            }
        }
    }

    /// Second derivative of `theta`, from the analytic pulse derivatives.
    pub fn theta_accel(&self, t: f64) -> f64 {
        let d = self.derivatives(t);
        let g0_sq = d.j * d.j + d.g2 * d.g2;
        if g0_sq == 0.0 {
            return 0.0;
        }
        let rate = (d.dj * d.g2 - d.j * d.dg2) / g0_sq;
        (d.ddj * d.g2 - d.j * d.ddg2) / g0_sq - 2.0 * rate * (d.j * d.dj + d.g2 * d.dg2) / g0_sq
    }

    /// `g0 = sqrt(J^2 + G2^2)`.
    pub fn g0(&self, t: f64) -> f64 {
        let (j, g2) = self.couplings(t);
        j.hypot(g2)
    }

    /// Second mixing angle `phi` and its rate at detuning `delta`.
    ///
    /// `tan(2 phi) = 2 g0 / delta`, so `phi = atan2(2 g0, delta) / 2`, which is
    /// equivalent to the half-angle form and stays accurate for either sign of
    /// the detuning.
    pub fn phi_angles(&self, t: f64, delta: f64) -> Result<(f64, f64), ProtocolError> {
        self.check_window(t)?;
        let d = self.derivatives(t);
        let g0 = d.j.hypot(d.g2);
        if g0 == 0.0 {
            return Err(ProtocolError::Singular { t });
        }
        let phi = 0.5 * (2.0 * g0).atan2(delta);
        let phi_dot = (d.dj * d.j + d.dg2 * d.g2) * delta / ((delta * delta + 4.0 * g0 * g0) * g0);
        Ok((phi, phi_dot))
    }

    /// Adiabatic ratio `|theta_dot| / |delta/2 ± sqrt(delta^2/4 + g0^2)|`,
    /// taking the branch with the smaller denominator.
    pub fn adiabatic_ratio(&self, t: f64, delta: f64) -> Result<f64, ProtocolError> {
        self.check_window(t)?;
        let g0 = self.g0(t);
        let gap = min_gap(g0, delta);
        if gap == 0.0 {
            return Err(ProtocolError::Singular { t });
        }
        Ok(self.theta_rate(t).abs() / gap)
    }

    pub fn sample(&self, t: f64, delta: f64) -> Result<AngleSample, ProtocolError> {
        let (j, g2) = self.pulse_pair(t)?;
        let (phi, phi_dot) = self.phi_angles(t, delta)?;
        Ok(AngleSample {
            t,
            j,
            g2,
            g0: j.hypot(g2),
            theta: j.atan2(g2),
            theta_dot: self.theta_rate(t),
            phi,
            phi_dot,
            ratio: self.adiabatic_ratio(t, delta)?,
        })
    }

    /// First time at which `J/G2` drops to `ratio`, found by bisection on the
    /// monotone log-ratio. `None` when the window never reaches it.
    pub fn time_at_ratio(&self, ratio: f64, from: f64, to: f64) -> Option<f64> {
        let target = ratio.ln();
        let f = |t: f64| self.coupling_ratio(t).ln() - target;
        let (mut lo, mut hi) = (from, to);
        if f(lo) < 0.0 || f(hi) > 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.abs().max(1.0) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Largest `|theta_dot|` over the window: a dense scan followed by a
    /// golden-section refinement around the best sample.
    pub fn max_theta_dot(&self) -> f64 {
        self.scan_max(|t| self.theta_rate(t).abs()).1
    }

    /// Largest adiabatic ratio over the window at detuning `delta`.
    pub fn max_adiabatic_ratio(&self, delta: f64) -> f64 {
        let gap_ratio = |t: f64| {
            let gap = min_gap(self.g0(t), delta);
            if gap == 0.0 {
                f64::INFINITY
            } else {
                self.theta_rate(t).abs() / gap
            }
        };
        self.scan_max(gap_ratio).1
    }

    fn scan_max(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        const SAMPLES: usize = 4001;
        let span = self.t_end - self.t_start;
        let step = span / (SAMPLES - 1) as f64;
        let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
        for i in 0..SAMPLES {
            let v = f(self.t_start + step * i as f64);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let mut lo = self.t_start + step * best_i.saturating_sub(1) as f64;
        let mut hi = (self.t_start + step * (best_i + 1) as f64).min(self.t_end);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..100 {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = f(x2);
            }
            if hi - lo < 1e-12 * span {
                break;
            }
        }
        let t_mid = 0.5 * (lo + hi);
        let refined = f(t_mid);
        if refined > best {
            (t_mid, refined)
        } else {
            (self.t_start + step * best_i as f64, best)
        }
    }
}

/// Smaller of the two bright-state gaps `|delta/2 ± sqrt(delta^2/4 + g0^2)|`.
pub fn min_gap(g0: f64, delta: f64) -> f64 {
    let s = (0.25 * delta * delta + g0 * g0).sqrt();
    // |delta|/2 - s loses precision when g0 << |delta|; use the product form.
    g0 * g0 / (s + 0.5 * delta.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn gaussian(width: f64) -> ProtocolParams {
        ProtocolParams::with_defaults(Family::Gaussian, 0.1, width).unwrap()
    }

    #[test]
    fn gaussian_midpoint_is_symmetric() {
        let p = gaussian(16.0);
        let (j, g2) = p.pulse_pair(p.shift).unwrap();
        let expected = 0.1 * (-(p.delay / p.width).powi(2)).exp();
        assert!((j - expected).abs() < 1e-15);
        assert!((g2 - expected).abs() < 1e-15);
        assert!((p.mixing_theta(p.shift).unwrap() - FRAC_PI_4).abs() < 1e-15);
        let rate = p.theta_dot(p.shift).unwrap();
        assert!((rate + 2.0 * p.delay / (p.width * p.width)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_start_ratio_matches_reported() {
        let p = gaussian(1600.0);
        let r = p.coupling_ratio(0.0);
        assert!((r / 1.47e4 - 1.0).abs() < 0.01, "ratio {r}");
    }

    #[test]
    fn invsqrt_midpoint_rate() {
        let p = ProtocolParams::with_defaults(Family::InvSqrt, 0.1, 253.0).unwrap();
        let rate = p.theta_dot(p.shift).unwrap();
        assert!((rate + 1.0 / (4.0 * 253.0)).abs() < 1e-15);
        // g0 is constant for this family.
        for t in [0.0, 1000.0, p.shift, 9000.0] {
            assert!((p.g0(t) - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn invsqrt_end_ratio_at_reported_time() {
        let p = ProtocolParams::with_defaults(Family::InvSqrt, 0.1, 253.0).unwrap();
        let t = p.time_at_ratio(1.04e-3, p.t_start, p.t_end).unwrap();
        assert!((p.coupling_ratio(t) / 1.04e-3 - 1.0).abs() < 1e-9);
        assert!(t > p.shift && t < p.t_end);
    }

    #[test]
    fn vitanov_starts_in_j() {
        let p = ProtocolParams::with_defaults(Family::Vitanov, 0.1, 10.0).unwrap();
        let (j, g2) = p.pulse_pair(0.0).unwrap();
        let arg = PI / (2.0 + 2.0 * 10f64.exp());
        assert!((j - 0.1 * arg.cos()).abs() < 1e-15);
        assert!((g2 - 0.1 * arg.sin()).abs() < 1e-15);
        assert!(j > 0.0999 && g2 < 1e-5);
    }

    #[test]
    fn window_defaults_follow_family_rules() {
        assert_eq!(
            window_defaults(Family::Gaussian, 16.0, 12.8, 48.0),
            (0.0, 96.0)
        );
        assert_eq!(window_defaults(Family::Sin4, 126.0, 63.0, 0.0), (0.0, 63.0));
        assert_eq!(window_defaults(Family::Vitanov, 3.95, 0.0, 0.0).1, 79.0);
        assert_eq!(window_defaults(Family::InvSqrt, 2.53, 0.0, 50.6).1, 101.2);
    }

    #[test]
    fn window_edges_are_counterintuitive() {
        for fam in Family::ALL {
            let p = ProtocolParams::with_defaults(fam, 0.1, 100.0).unwrap();
            let start = p.mixing_theta(p.t_start).unwrap();
            let end = p.mixing_theta(p.t_end).unwrap();
            assert!(
                (start - FRAC_PI_2).abs() < 1e-3_f64.atan(),
                "{fam}: {start}"
            );
            assert!(end < 1e-2, "{fam}: {end}");
        }
    }

    #[test]
    fn out_of_window_is_rejected() {
        let p = gaussian(16.0);
        assert!(matches!(
            p.pulse_pair(-1.0),
            Err(ProtocolError::OutOfWindow { .. })
        ));
        assert!(matches!(
            p.theta_dot(p.t_end + 1.0),
            Err(ProtocolError::OutOfWindow { .. })
        ));
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        assert!(matches!(
            "square".parse::<Family>(),
            Err(ProtocolError::UnknownFamily(_))
        ));
        assert_eq!("Sin4".parse::<Family>().unwrap(), Family::Sin4);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        let mut p = gaussian(16.0);
        p.delay = 0.0;
        assert!(p.validate().is_err());
        let mut s = ProtocolParams::with_defaults(Family::Sin4, 0.1, 126.0).unwrap();
        s.t_end = 70.0;
        assert!(s.validate().is_err());
        let mut w = gaussian(16.0);
        w.t_end = 50.0; // J/G2 still ~0.2 here
        assert!(w.validate().is_err());
    }

    #[test]
    fn phi_at_resonance_is_quarter_pi() {
        let p = gaussian(16.0);
        for t in [10.0, 48.0, 70.0] {
            let (phi, rate) = p.phi_angles(t, 0.0).unwrap();
            assert!((phi - FRAC_PI_4).abs() < 1e-15);
            assert_eq!(rate, 0.0);
        }
        let (phi, _) = p.phi_angles(48.0, 1e9).unwrap();
        assert!(phi < 1e-9);
    }

    #[test]
    fn ratio_at_resonance_is_rate_over_g0() {
        let p = gaussian(16.0);
        for t in [20.0, 48.0, 60.0] {
            let r = p.adiabatic_ratio(t, 0.0).unwrap();
            let expected = p.theta_rate(t).abs() / p.g0(t);
            assert!((r - expected).abs() <= 1e-14 * expected);
        }
    }

    #[test]
    fn stirap_width_is_adiabatic_but_sta_width_is_not() {
        let with = |fam, w| {
            ProtocolParams::with_defaults(fam, 0.1, w)
                .unwrap()
                .max_adiabatic_ratio(0.0)
        };
        assert!(with(Family::InvSqrt, 253.0) < 0.01);
        assert!(with(Family::Vitanov, 395.0) < 0.01);
        assert!(gaussian(16.0).max_adiabatic_ratio(0.0) > 0.01);
    }

    #[test]
    fn gaussian_max_ratio_sits_at_midpoint() {
        // At t = t_f: R = (2 xi / T^2) / (sqrt(2) g exp(-(xi/T)^2)).
        for w in [16.0, 1600.0] {
            let p = gaussian(w);
            let expected =
                2.0 * p.delay / (w * w) / (2f64.sqrt() * 0.1 * (-(p.delay / w).powi(2)).exp());
            let got = p.max_adiabatic_ratio(0.0);
            assert!(
                (got - expected).abs() < 1e-9 * expected,
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn max_theta_dot_hits_analytic_peaks() {
        let p = gaussian(16.0);
        let expected = 2.0 * p.delay / (p.width * p.width);
        assert!((p.max_theta_dot() - expected).abs() < 1e-12 * expected);
        let q = ProtocolParams::with_defaults(Family::InvSqrt, 0.1, 2.53).unwrap();
        assert!((q.max_theta_dot() - 1.0 / (4.0 * 2.53)).abs() < 1e-12);
    }
}
