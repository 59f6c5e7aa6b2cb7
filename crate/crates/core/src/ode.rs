//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems.
//!
//! Accepted steps are handed to an observer together with the endpoint
//! derivatives, so callers can build cubic Hermite dense output without the
//! integrator storing the trajectory.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error(
        "step size underflow (h = {h:e}) at t = {t}; the system is too stiff for the tolerances"
    )]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("tolerance not met within {steps} steps (stopped at t = {t})")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step allowed; `f64::INFINITY` for no limit.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rtol: 1e-9,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

impl Settings {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Settings {
            rtol,
            atol,
            ..Settings::default()
        }
    }
}

/// An accepted step `[t0, t1]` with states and derivatives at both ends.
pub struct Step<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [C64],
    pub y1: &'a [C64],
    pub f0: &'a [C64],
    pub f1: &'a [C64],
}

impl Step<'_> {
    /// Cubic Hermite interpolant of component `i` at `t`.
    pub fn interpolate(&self, i: usize, t: f64) -> C64 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.y0[i] * h00 + self.f0[i] * (h10 * h) + self.y1[i] * h01 + self.f1[i] * (h11 * h)
    }

    pub fn interpolate_all(&self, t: f64, out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.interpolate(i, t);
        }
    }

    /// Real part of the interpolant as a cubic `c0 + c1 s + c2 s^2 + c3 s^3`
    /// in the normalized step coordinate `s = (t - t0)/h`.
    pub fn real_cubic(&self, i: usize) -> [f64; 4] {
        let h = self.t1 - self.t0;
        let (p0, p1) = (self.y0[i].re, self.y1[i].re);
        let (m0, m1) = (self.f0[i].re * h, self.f1[i].re * h);
        [
            p0,
            m0,
            -3.0 * p0 - 2.0 * m0 + 3.0 * p1 - m1,
            2.0 * p0 + m0 - 2.0 * p1 + m1,
        ]
    }
}

/// Accepted steps recorded for later evaluation at arbitrary times.
#[derive(Debug, Clone, Default)]
pub struct DenseTrajectory {
    times: Vec<f64>,
    states: Vec<Vec<C64>>,
    slopes: Vec<Vec<C64>>,
}

impl DenseTrajectory {
    /// Starts a trajectory at `(t0, y0)` with slope `f0`.
    pub fn new(t0: f64, y0: &[C64], f0: &[C64]) -> Self {
        DenseTrajectory {
            times: vec![t0],
            states: vec![y0.to_vec()],
            slopes: vec![f0.to_vec()],
        }
    }

    pub fn push(&mut self, step: &Step<'_>) {
        if self.times.is_empty() {
            *self = DenseTrajectory::new(step.t0, step.y0, step.f0);
        }
        self.times.push(step.t1);
        self.states.push(step.y1.to_vec());
        self.slopes.push(step.f1.to_vec());
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap_or(&self.times[0]))
    }

    /// Component `i` at time `t`, clamped to the recorded span.
    pub fn eval(&self, i: usize, t: f64) -> C64 {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.states[0][i];
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1][i];
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, n - 1);
        let step = Step {
            t0: self.times[k - 1],
            t1: self.times[k],
            y0: &self.states[k - 1],
            y1: &self.states[k],
            f0: &self.slopes[k - 1],
            f1: &self.slopes[k],
        };
        step.interpolate(i, t)
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Summary of a completed integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`, calling `observer` after
/// every accepted step. Returns the final state.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[C64],
    settings: &Settings,
    mut observer: O,
) -> Result<(Vec<C64>, Stats), OdeError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(&Step<'_>),
{
    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut y_new = vec![zero; n];
    let mut y_tmp = vec![zero; n];
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut stats = Stats::default();

    let span = t1 - t0;
    if span <= 0.0 {
        return Ok((y, stats));
    }
    let h_max = settings.h_max.min(span);

    rhs(t0, &y, &mut k[0]);
    stats.evaluations += 1;
    if !all_finite(&k[0]) || !all_finite(&y) {
        return Err(OdeError::NonFinite { t: t0 });
    }
    let (k_first, k_rest) = k.split_at_mut(1);
    let mut h = initial_step(
        &mut rhs,
        t0,
        &y,
        &k_first[0],
        settings,
        h_max,
        &mut y_tmp,
        &mut k_rest[0],
    );
    stats.evaluations += 1;

    let mut t = t0;
    let mut err_old = 1e-4_f64;
    let mut last_rejected = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= settings.max_steps {
            return Err(OdeError::MaxStepsExceeded {
                t,
                steps: settings.max_steps,
            });
        }
        let mut last = false;
        if t + h >= t1 || t1 - (t + h) < 1e-12 * span {
            h = t1 - t;
            last = true;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }

        let (k1, rest) = k.split_at_mut(1);
        let k1 = &k1[0];
        let (k2, rest) = rest.split_at_mut(1);
        let k2 = &mut k2[0];
        let (k3, rest) = rest.split_at_mut(1);
        let k3 = &mut k3[0];
        let (k4, rest) = rest.split_at_mut(1);
        let k4 = &mut k4[0];
        let (k5, rest) = rest.split_at_mut(1);
        let k5 = &mut k5[0];
        let (k6, k7) = rest.split_at_mut(1);
        let k6 = &mut k6[0];
        let k7 = &mut k7[0];

        for i in 0..n {
            y_tmp[i] = y[i] + k1[i] * (h * A21);
        }
        rhs(t + C2 * h, &y_tmp, k2);
        for i in 0..n {
            y_tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        rhs(t + C3 * h, &y_tmp, k3);
        for i in 0..n {
            y_tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        rhs(t + C4 * h, &y_tmp, k4);
        for i in 0..n {
            y_tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        rhs(t + C5 * h, &y_tmp, k5);
        for i in 0..n {
            y_tmp[i] =
                y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        rhs(t + h, &y_tmp, k6);
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        rhs(t + h, &y_new, k7);
        stats.evaluations += 6;

        let mut acc = 0.0;
        for i in 0..n {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = settings.atol + settings.rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        let err = (acc / n as f64).sqrt();
        if !err.is_finite() {
            if !all_finite(&y_new) && h <= 1e-10 * span {
                return Err(OdeError::NonFinite { t });
            }
            h *= FAC_MIN;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let step = Step {
                t0: t,
                t1: if last { t1 } else { t + h },
                y0: &y,
                y1: &y_new,
                f0: k1,
                f1: k7,
            };
            observer(&step);
            stats.accepted += 1;
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);

            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-0.2 + 0.75 * BETA) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err_c;
            h = (h * fac).min(h_max);
            last_rejected = false;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            stats.rejected += 1;
            last_rejected = true;
        }
    }
    if !all_finite(&y) {
        return Err(OdeError::NonFinite { t: t1 });
    }
    Ok((y, stats))
}

fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Starting step from the usual two-derivative estimate.
#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[C64],
    f0: &[C64],
    s: &Settings,
    h_max: f64,
    y1: &mut [C64],
    f1: &mut [C64],
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len() as f64;
    let scale = |y: C64| s.atol + s.rtol * y.norm();
    let d0 = (y0
        .iter()
        .map(|&y| (y.norm() / scale(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let d1 = (y0
        .iter()
        .zip(f0)
        .map(|(&y, f)| (f.norm() / scale(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);
    for i in 0..y0.len() {
        y1[i] = y0[i] + f0[i] * h0;
    }
    rhs(t0 + h0, y1, f1);
    let d2 = (y0
        .iter()
        .zip(f0.iter().zip(f1.iter()))
        .map(|(&y, (a, b))| ((b - a).norm() / scale(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_max)
}
