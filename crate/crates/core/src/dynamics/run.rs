use num_complex::Complex64 as C64;
use serde::Serialize;

use super::moments::{rhs_into, MomentState, SystemParams};
use super::DynamicsError;
use crate::ode::{self, Settings, Step};
use crate::schedule::CouplingSource;

/// Default relative and absolute tolerances. Halving them moves `pb_final`
/// by less than 1e-6 relative on the preset scenarios.
pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub settings: Settings,
    /// Number of uniformly spaced output samples, endpoints included.
    pub grid_points: usize,
    /// Step cap used when counter-rotating terms are on. Without them the cap
    /// is 1% of the window.
    pub h_max_counter_rotating: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            settings: Settings::with_tolerances(DEFAULT_RTOL, DEFAULT_ATOL),
            grid_points: 2000,
            h_max_counter_rotating: 1.0,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegrateOptions {
            settings: Settings::with_tolerances(rtol, atol),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest `|Im <c† c>|` over accepted steps.
    pub max_number_imag: f64,
    /// Smallest `Re <c† c>` over accepted steps.
    pub min_number: f64,
    pub max_adiabatic_ratio: Option<f64>,
    pub max_theta_dot: Option<f64>,
    pub start_ratio: Option<f64>,
    pub end_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub pb: Vec<f64>,
    pub pb_final: f64,
    /// Minimum of `P_b` over the window, refined between steps.
    pub pb_min: f64,
    /// First time the minimum is reached.
    pub t_reference: f64,
    /// First time `P_b` drops below one quantum, if it does.
    pub t_ground: Option<f64>,
    pub final_state: MomentState,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiguresOfMerit {
    pub pb_final: f64,
    pub pb_min: f64,
    pub t_reference: f64,
    pub t_ground: Option<f64>,
}

pub fn figures_of_merit(run: &RunResult) -> FiguresOfMerit {
    FiguresOfMerit {
        pb_final: run.pb_final,
        pb_min: run.pb_min,
        t_reference: run.t_reference,
        t_ground: run.t_ground,
    }
}

/// Ratio of reference times, slow protocol over fast protocol.
pub fn speedup(slow: &RunResult, fast: &RunResult) -> f64 {
    slow.t_reference / fast.t_reference
}

fn cubic_at(c: &[f64; 4], s: f64) -> f64 {
    c[0] + s * (c[1] + s * (c[2] + s * c[3]))
}

/// Smallest value of a cubic on `[0, 1]` and where it occurs (first one).
pub(crate) fn cubic_min(c: &[f64; 4]) -> (f64, f64) {
    let mut best = (c[0], 0.0);
    let mut consider = |s: f64| {
        if (0.0..=1.0).contains(&s) {
            let v = cubic_at(c, s);
            if v < best.0 {
                best = (v, s);
            }
        }
    };
    // c1 + 2 c2 s + 3 c3 s^2 = 0
    let (a, b, cc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    if a.abs() > 1e-300 {
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut roots = [q / a, if q != 0.0 { cc / q } else { f64::NAN }];
            roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            for r in roots {
                if r.is_finite() {
                    consider(r);
                }
            }
        }
    } else if b.abs() > 1e-300 {
        consider(-cc / b);
    }
    consider(1.0);
    best
}

/// First `s` in `[0, s_hi]` with `cubic(s) = level`, given
/// `cubic(0) >= level > cubic(s_hi)`.
fn first_crossing(c: &[f64; 4], level: f64, s_hi: f64) -> f64 {
    // Bracket the first crossing by scanning, then bisect.
    let samples = 32;
    let mut lo = 0.0;
    let mut hi = s_hi;
    for k in 1..=samples {
        let s = s_hi * k as f64 / samples as f64;
        if cubic_at(c, s) < level {
            hi = s;
            break;
        }
        lo = s;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cubic_at(c, mid) < level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Tracker {
    grid: Vec<f64>,
    next: usize,
    p: [Vec<f64>; 3],
    pb_min: f64,
    t_min: f64,
    t_ground: Option<f64>,
    max_imag: f64,
    min_number: f64,
}

impl Tracker {
    fn observe(&mut self, step: &Step<'_>) {
        while self.next < self.grid.len() && self.grid[self.next] <= step.t1 {
            let t = self.grid[self.next].max(step.t0);
            for (mode, series) in self.p.iter_mut().enumerate() {
                series.push(step.interpolate(mode, t).re);
            }
            self.next += 1;
        }
        for mode in 0..3 {
            self.max_imag = self.max_imag.max(step.y1[mode].im.abs());
            self.min_number = self.min_number.min(step.y1[mode].re);
        }
        let cubic = step.real_cubic(2);
        let (v, s) = cubic_min(&cubic);
        let h = step.t1 - step.t0;
        if self.t_ground.is_none() && v < 1.0 && cubic[0] >= 1.0 {
            self.t_ground = Some(step.t0 + h * first_crossing(&cubic, 1.0, s));
        }
        if v < self.pb_min {
            self.pb_min = v;
            self.t_min = step.t0 + h * s;
        }
    }
}

/// Integrates the moment equations over `window`.
pub fn integrate(
    sys: &SystemParams,
    sched: &dyn CouplingSource,
    initial: &MomentState,
    window: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<RunResult, DynamicsError> {
    sys.validate()?;
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(DynamicsError::InvalidWindow(t0, t1));
    }
    if !initial.is_finite() {
        return Err(DynamicsError::NonFinite { t: t0 });
    }
    for n in [initial.p1(), initial.p2(), initial.pb()] {
        if n < 0.0 {
            return Err(DynamicsError::NegativeOccupation(n));
        }
    }
    let points = opts.grid_points.max(2);
    let grid: Vec<f64> = (0..points)
        .map(|k| {
            if k + 1 == points {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (points - 1) as f64
            }
        })
        .collect();

    let pb0 = initial.pb();
    let mut tracker = Tracker {
        grid,
        next: 1,
        p: [vec![initial.p1()], vec![initial.p2()], vec![pb0]],
        pb_min: pb0,
        t_min: t0,
        t_ground: if pb0 < 1.0 { Some(t0) } else { None },
        max_imag: 0.0,
        min_number: pb0.min(initial.p1()).min(initial.p2()),
    };

    let mut settings = opts.settings;
    let cap = if sys.include_counter_rotating {
        opts.h_max_counter_rotating
    } else {
        0.01 * (t1 - t0)
    };
    settings.h_max = settings.h_max.min(cap);

    let mut non_finite = None;
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        rhs_into(t, y, sys, sched.couplings(t), dy);
        if non_finite.is_none() && dy.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            non_finite = Some(t);
        }
    };
    let outcome = ode::integrate(rhs, t0, t1, &initial.m, &settings, |step| {
        tracker.observe(step)
    });
    if let Some(t) = non_finite {
        return Err(DynamicsError::NonFinite { t });
    }
    let (y, stats) = outcome?;
    let final_state = MomentState::from_slice(&y);

    // Guard against grid points lost to rounding at the window end.
    while tracker.p[0].len() < tracker.grid.len() {
        tracker.p[0].push(final_state.p1());
        tracker.p[1].push(final_state.p2());
        tracker.p[2].push(final_state.pb());
    }
    let last = tracker.grid.len() - 1;
    tracker.p[0][last] = final_state.p1();
    tracker.p[1][last] = final_state.p2();
    tracker.p[2][last] = final_state.pb();

    let (max_adiabatic_ratio, max_theta_dot, start_ratio, end_ratio) = match sched.protocol() {
        Some(p) => (
            Some(p.max_adiabatic_ratio(sys.delta)),
            Some(p.max_theta_dot()),
            Some(p.coupling_ratio(t0)),
            Some(p.coupling_ratio(t1)),
        ),
        None => (None, None, None, None),
    };
    let [p1, p2, pb] = tracker.p;
    Ok(RunResult {
        times: tracker.grid,
        p1,
        p2,
        pb,
        pb_final: final_state.pb(),
        pb_min: tracker.pb_min.min(final_state.pb()),
        t_reference: tracker.t_min,
        t_ground: tracker.t_ground,
        final_state,
        diagnostics: Diagnostics {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            rhs_evaluations: stats.evaluations,
            max_number_imag: tracker.max_imag,
            min_number: tracker.min_number,
            max_adiabatic_ratio,
            max_theta_dot,
            start_ratio,
            end_ratio,
        },
    })
}
