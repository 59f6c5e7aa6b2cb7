use num_complex::Complex64 as C64;

use super::moments::{Moment, MomentState, SystemParams};
use super::run::{cubic_min, Diagnostics, IntegrateOptions, RunResult};
use super::DynamicsError;
use crate::ode;
use crate::schedule::{CouplingSource, Couplings};

/// Top-level population above which a truncation is rejected. This is a
/// coarse guard; convergence in the cutoffs is the real check.
const LEAKAGE_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockDims {
    pub d1: usize,
    pub d2: usize,
    pub db: usize,
}

impl FockDims {
    pub fn total(&self) -> usize {
        self.d1 * self.d2 * self.db
    }

    pub fn index(&self, n1: usize, n2: usize, nb: usize) -> usize {
        (n1 * self.d2 + n2) * self.db + nb
    }

    fn levels(&self, idx: usize) -> [usize; 3] {
        [
            idx / (self.d2 * self.db),
            (idx / self.db) % self.d2,
            idx % self.db,
        ]
    }
}

type Sparse = Vec<(usize, usize, C64)>;

/// Sparse ladder operators on a truncated three-mode Fock space and the
/// Lindblad generator built from them.
pub struct FockSpace {
    pub dims: FockDims,
    ann: [Sparse; 3],
    number: [Vec<f64>; 3],
    /// Diagonal of `b b†` in the truncated space.
    bbdag: Vec<f64>,
}

fn matmul(a: &Sparse, b: &Sparse, n: usize) -> Sparse {
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    for &(r, c, v) in b {
        rows[r].push((c, v));
    }
    let mut acc = std::collections::BTreeMap::new();
    for &(r, k, v) in a {
        for &(c, w) in &rows[k] {
            *acc.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v * w;
        }
    }
    acc.into_iter().map(|((r, c), v)| (r, c, v)).collect()
}

fn adjoint(a: &Sparse) -> Sparse {
    a.iter().map(|&(r, c, v)| (c, r, v.conj())).collect()
}

impl FockSpace {
    pub fn new(dims: FockDims) -> Self {
        let n = dims.total();
        let mut ann: [Sparse; 3] = Default::default();
        let mut number: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut bbdag = vec![0.0; n];
        let cutoffs = [dims.d1, dims.d2, dims.db];
        for idx in 0..n {
            let lv = dims.levels(idx);
            for mode in 0..3 {
                number[mode][idx] = lv[mode] as f64;
                if lv[mode] > 0 {
                    let mut lower = lv;
                    lower[mode] -= 1;
                    let target = dims.index(lower[0], lower[1], lower[2]);
                    ann[mode].push((target, idx, C64::new((lv[mode] as f64).sqrt(), 0.0)));
                }
            }
            bbdag[idx] = if lv[2] + 1 < cutoffs[2] {
                lv[2] as f64 + 1.0
            } else {
                0.0
            };
        }
        FockSpace {
            dims,
            ann,
            number,
            bbdag,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    /// Density matrix of a product of Fock states.
    pub fn fock_density(&self, n1: usize, n2: usize, nb: usize) -> Vec<C64> {
        let n = self.dim();
        let mut rho = vec![C64::new(0.0, 0.0); n * n];
        let i = self.dims.index(n1, n2, nb);
        rho[i * n + i] = C64::new(1.0, 0.0);
        rho
    }

    /// Density matrix of the pure state `psi`.
    pub fn pure_density(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut rho = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                rho[r * n + c] = psi[r] * psi[c].conj();
            }
        }
        rho
    }

    /// `Tr(rho O)` for a sparse operator `O`.
    fn expect(&self, rho: &[C64], op: &Sparse) -> C64 {
        let n = self.dim();
        op.iter().map(|&(r, c, v)| v * rho[c * n + r]).sum()
    }

    /// All twelve second moments of `rho`.
    pub fn moments(&self, rho: &[C64]) -> MomentState {
        let n = self.dim();
        let mut s = MomentState::default();
        for which in Moment::ALL {
            let (j, k, both_dagger) = which.modes();
            let cj = adjoint(&self.ann[j]);
            let second = if both_dagger {
                adjoint(&self.ann[k])
            } else {
                self.ann[k].clone()
            };
            s.set(which, self.expect(rho, &matmul(&cj, &second, n)));
        }
        s
    }

    /// Population in the highest retained level of any mode.
    pub fn top_population(&self, rho: &[C64]) -> f64 {
        let n = self.dim();
        let tops = [self.dims.d1 - 1, self.dims.d2 - 1, self.dims.db - 1];
        (0..n)
            .filter(|&i| {
                let lv = self.dims.levels(i);
                (0..3).any(|m| lv[m] == tops[m])
            })
            .map(|i| rho[i * n + i].re)
            .sum()
    }

    pub fn trace(&self, rho: &[C64]) -> C64 {
        let n = self.dim();
        (0..n).map(|i| rho[i * n + i]).sum()
    }

    fn diag_population(&self, rho: &[C64], mode: usize) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| self.number[mode][i] * rho[i * n + i].re)
            .sum()
    }

    /// Lindblad generator `drho/dt` at time `t`.
    pub fn lindblad_rhs(
        &self,
        t: f64,
        rho: &[C64],
        sys: &SystemParams,
        c: Couplings,
        out: &mut [C64],
    ) {
        let n = self.dim();
        let zero = C64::new(0.0, 0.0);
        let i = C64::i();
        let rate_b_down = sys.gamma_m * (sys.n_bar + 1.0);
        let rate_b_up = sys.gamma_m * sys.n_bar;

        // X = -i H_eff rho; the diagonal part of H_eff is applied directly.
        let mut x = vec![zero; n * n];
        for r in 0..n {
            let diag = C64::new(
                sys.delta * self.number[1][r],
                -0.5 * (sys.kappa1 * self.number[0][r]
                    + sys.kappa2 * self.number[1][r]
                    + rate_b_down * self.number[2][r]
                    + rate_b_up * self.bbdag[r]),
            );
            let coef = -i * diag;
            for col in 0..n {
                x[r * n + col] = coef * rho[r * n + col];
            }
        }
        let g1 = if sys.sta_enabled { c.g1 } else { zero };
        let e = if sys.include_counter_rotating {
            C64::from_polar(1.0, 2.0 * sys.omega_m * t)
        } else {
            zero
        };
        let g = C64::new(c.g2, 0.0);
        let j = C64::new(c.j, 0.0);
        let [a1, a2, b] = &self.ann;
        let a1d = adjoint(a1);
        let a2d = adjoint(a2);
        let bd = adjoint(b);
        // Each term is coef * A * B acting on rho from the left.
        let terms: [(C64, &Sparse, &Sparse); 8] = [
            (j, &a1d, a2),
            (j, &a2d, a1),
            (g, &a2d, b),
            (g, &bd, a2),
            (g * e, &a2d, &bd),
            (g * e.conj(), a2, b),
            (g1, &a1d, b),
            (g1.conj(), &bd, a1),
        ];
        let mut tmp = vec![zero; n * n];
        for (coef, left, right) in terms {
            if coef == zero {
                continue;
            }
            tmp.iter_mut().for_each(|z| *z = zero);
            apply_left(right, C64::new(1.0, 0.0), rho, &mut tmp, n);
            apply_left(left, -i * coef, &tmp, &mut x, n);
        }
        for r in 0..n {
            for col in 0..n {
                out[r * n + col] = x[r * n + col] + x[col * n + r].conj();
            }
        }
        let jumps: [(f64, &Sparse, &Sparse); 4] = [
            (sys.kappa1, a1, &a1d),
            (sys.kappa2, a2, &a2d),
            (rate_b_down, b, &bd),
            (rate_b_up, &bd, b),
        ];
        for (rate, l, ld) in jumps {
            if rate == 0.0 {
                continue;
            }
            tmp.iter_mut().for_each(|z| *z = zero);
            apply_left(l, C64::new(rate, 0.0), rho, &mut tmp, n);
            // out += tmp * L†, with (L†)[k][c] = conj(L[c][k]).
            for &(k, c, v) in ld.iter() {
                for r in 0..n {
                    out[r * n + c] += tmp[r * n + k] * v;
                }
            }
        }
    }
}

/// `out += coef * A * x` for square matrices stored row-major.
fn apply_left(a: &Sparse, coef: C64, x: &[C64], out: &mut [C64], n: usize) {
    for &(r, k, v) in a {
        let w = coef * v;
        let (src, dst) = (&x[k * n..(k + 1) * n], r * n);
        for (c, s) in src.iter().enumerate() {
            out[dst + c] += w * s;
        }
    }
}

/// Mixture of the two Fock states adjacent to `mean`, reproducing it exactly.
fn fock_mixture_weights(mean: f64, cutoff: usize) -> Result<[(usize, f64); 2], DynamicsError> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(DynamicsError::NegativeOccupation(mean));
    }
    let lo = mean.floor() as usize;
    if lo + 1 >= cutoff && mean > lo as f64 || lo >= cutoff {
        return Err(DynamicsError::Truncation {
            t: f64::NAN,
            population: 1.0,
        });
    }
    let frac = mean - lo as f64;
    Ok([(lo, 1.0 - frac), (lo + 1, frac)])
}

/// Solves the full Lindblad equation in a truncated Fock space starting from
/// a diagonal state whose occupations match `initial`. Off-diagonal moments of
/// `initial` must vanish.
pub fn fock_oracle(
    sys: &SystemParams,
    sched: &dyn CouplingSource,
    dims: FockDims,
    initial: &MomentState,
    window: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<RunResult, DynamicsError> {
    for which in &Moment::ALL[3..] {
        if initial.get(*which).norm() > 0.0 {
            return Err(DynamicsError::Unsupported(format!(
                "the Fock oracle only builds diagonal initial states; {which:?} is nonzero"
            )));
        }
    }
    let space = FockSpace::new(dims);
    let n = space.dim();
    let w1 = fock_mixture_weights(initial.p1(), dims.d1)?;
    let w2 = fock_mixture_weights(initial.p2(), dims.d2)?;
    let wb = fock_mixture_weights(initial.pb(), dims.db)?;
    let mut rho = vec![C64::new(0.0, 0.0); n * n];
    for &(l1, p1) in &w1 {
        for &(l2, p2) in &w2 {
            for &(lb, pb) in &wb {
                let w = p1 * p2 * pb;
                if w > 0.0 {
                    let i = dims.index(l1, l2, lb);
                    rho[i * n + i] += w;
                }
            }
        }
    }
    run_density(&space, sys, sched, rho, window, opts)
}

/// Same as [`fock_oracle`] from an explicit density matrix (row-major).
pub fn fock_oracle_from_density(
    sys: &SystemParams,
    sched: &dyn CouplingSource,
    dims: FockDims,
    rho0: Vec<C64>,
    window: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<RunResult, DynamicsError> {
    let space = FockSpace::new(dims);
    if rho0.len() != space.dim() * space.dim() {
        return Err(DynamicsError::Unsupported(format!(
            "density matrix has {} entries, expected {}",
            rho0.len(),
            space.dim() * space.dim()
        )));
    }
    run_density(&space, sys, sched, rho0, window, opts)
}

fn run_density(
    space: &FockSpace,
    sys: &SystemParams,
    sched: &dyn CouplingSource,
    rho0: Vec<C64>,
    window: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<RunResult, DynamicsError> {
    sys.validate()?;
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(DynamicsError::InvalidWindow(t0, t1));
    }
    let top = space.top_population(&rho0);
    if top > LEAKAGE_LIMIT {
        return Err(DynamicsError::Truncation {
            t: t0,
            population: top,
        });
    }
    let points = opts.grid_points.max(2);
    let times: Vec<f64> = (0..points)
        .map(|k| {
            if k + 1 == points {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (points - 1) as f64
            }
        })
        .collect();
    let mut series: [Vec<f64>; 3] = Default::default();
    for (m, s) in series.iter_mut().enumerate() {
        s.push(space.diag_population(&rho0, m));
    }
    let mut next = 1;
    let mut pb_min = series[2][0];
    let mut t_min = t0;
    let mut t_ground = if pb_min < 1.0 { Some(t0) } else { None };
    let mut leak: Option<(f64, f64)> = None;
    let n = space.dim();

    let mut settings = opts.settings;
    let cap = if sys.include_counter_rotating {
        opts.h_max_counter_rotating
    } else {
        0.01 * (t1 - t0)
    };
    settings.h_max = settings.h_max.min(cap);

    let rhs =
        |t: f64, y: &[C64], dy: &mut [C64]| space.lindblad_rhs(t, y, sys, sched.couplings(t), dy);
    let outcome = ode::integrate(rhs, t0, t1, &rho0, &settings, |step| {
        let mut rho_t = vec![C64::new(0.0, 0.0); n * n];
        while next < times.len() && times[next] <= step.t1 {
            step.interpolate_all(times[next].max(step.t0), &mut rho_t);
            for (m, s) in series.iter_mut().enumerate() {
                s.push(space.diag_population(&rho_t, m));
            }
            next += 1;
        }
        let top = space.top_population(step.y1);
        if leak.is_none() && top > LEAKAGE_LIMIT {
            leak = Some((step.t1, top));
        }
        // P_b along the step as a cubic, from the endpoint values and slopes.
        let h = step.t1 - step.t0;
        let (v0, v1) = (
            space.diag_population(step.y0, 2),
            space.diag_population(step.y1, 2),
        );
        let (d0, d1) = (
            space.diag_population(step.f0, 2) * h,
            space.diag_population(step.f1, 2) * h,
        );
        let cubic = [
            v0,
            d0,
            3.0 * (v1 - v0) - 2.0 * d0 - d1,
            2.0 * (v0 - v1) + d0 + d1,
        ];
        let (v, s) = cubic_min(&cubic);
        if t_ground.is_none() && v < 1.0 {
            let mut lo = 0.0;
            let mut hi = s;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let val = cubic[0] + mid * (cubic[1] + mid * (cubic[2] + mid * cubic[3]));
                if val < 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            t_ground = Some(step.t0 + h * hi);
        }
        if v < pb_min {
            pb_min = v;
            t_min = step.t0 + h * s;
        }
    });
    if let Some((t, population)) = leak {
        return Err(DynamicsError::Truncation { t, population });
    }
    let (rho, stats) = outcome?;
    let final_state = space.moments(&rho);
    for s in series.iter_mut() {
        s.truncate(times.len());
    }
    while series[0].len() < times.len() {
        for (m, s) in series.iter_mut().enumerate() {
            s.push(space.diag_population(&rho, m));
        }
    }
    let [p1, p2, pb] = series;
    Ok(RunResult {
        times,
        p1,
        p2,
        pb,
        pb_final: final_state.pb(),
        pb_min: pb_min.min(final_state.pb()),
        t_reference: t_min,
        t_ground,
        final_state,
        diagnostics: Diagnostics {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            rhs_evaluations: stats.evaluations,
            ..Diagnostics::default()
        },
    })
}
