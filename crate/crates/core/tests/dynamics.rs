mod common;

use common::{small_scale, worst_gap};
use proptest::prelude::*;
use stacool::dynamics::{
    fock_oracle, fock_oracle_from_density, initial_state, integrate, moment_rhs, FockDims,
    FockSpace, IntegrateOptions, Moment, MomentState, SystemParams, DEFAULT_ATOL, DEFAULT_RTOL,
};
use stacool::protocols::Family;
use stacool::scenarios;
use stacool::schedule::{CouplingSchedule, Couplings};
use stacool::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Second-moment derivatives of a generic quadratic bosonic model
/// `H = a† M a + (a† Q a†^T + h.c.)/2` with damping rates `k` and thermal
/// input `noise` on the mechanical mode.
fn generic_rhs(
    m: &[[C64; 3]; 3],
    q: &[[C64; 3]; 3],
    k: [f64; 3],
    noise: f64,
    y: &MomentState,
) -> MomentState {
    let idx = |j: usize, l: usize| -> (Moment, bool) {
        let (a, b) = (j.min(l), j.max(l));
        let n = [
            [Moment::N1, Moment::A1A2, Moment::A1B],
            [Moment::A1A2, Moment::N2, Moment::A2B],
            [Moment::A1B, Moment::A2B, Moment::Nb],
        ][a][b];
        (n, j > l)
    };
    // N_jl = <a_j† a_l>, P_jl = <a_j† a_l†>
    let nn = |j: usize, l: usize| {
        let (which, swap) = idx(j, l);
        let v = y.get(which);
        if swap {
            v.conj()
        } else {
            v
        }
    };
    let pp = |j: usize, l: usize| {
        let (a, b) = (j.min(l), j.max(l));
        let which = [
            [Moment::P11, Moment::P12, Moment::P1B],
            [Moment::P12, Moment::P22, Moment::P2B],
            [Moment::P1B, Moment::P2B, Moment::Pbb],
        ][a][b];
        y.get(which)
    };
    let i = C64::i();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let dn = |j: usize, kk: usize| -> C64 {
        let mut s = c(0.0, 0.0);
        for l in 0..3 {
            s += i * m[j][l].conj() * nn(l, kk) + i * q[j][l].conj() * pp(kk, l).conj();
            s += -i * m[kk][l] * nn(j, l) - i * q[kk][l] * pp(j, l);
        }
        s - 0.5 * (k[j] + k[kk]) * nn(j, kk) + if j == 2 && kk == 2 { noise } else { 0.0 }
    };
    let dp = |j: usize, kk: usize| -> C64 {
        let mut s = c(0.0, 0.0);
        for l in 0..3 {
            s += i * m[j][l].conj() * pp(l, kk) + i * q[j][l].conj() * (nn(kk, l) + delta(kk, l));
            s += i * m[kk][l].conj() * pp(j, l) + i * q[kk][l].conj() * nn(j, l);
        }
        s - 0.5 * (k[j] + k[kk]) * pp(j, kk)
    };
    let mut out = MomentState::default();
    for which in Moment::ALL {
        let (j, l, pair) = which.modes();
        out.set(which, if pair { dp(j, l) } else { dn(j, l) });
    }
    out
}

fn generic_matrices(t: f64, sys: &SystemParams, cp: Couplings) -> ([[C64; 3]; 3], [[C64; 3]; 3]) {
    let z = c(0.0, 0.0);
    let g1 = if sys.sta_enabled { cp.g1 } else { z };
    let m = [
        [z, c(cp.j, 0.0), g1],
        [c(cp.j, 0.0), c(sys.delta, 0.0), c(cp.g2, 0.0)],
        [g1.conj(), c(cp.g2, 0.0), z],
    ];
    let mut q = [[z; 3]; 3];
    if sys.include_counter_rotating {
        let pair = cp.g2 * C64::from_polar(1.0, 2.0 * sys.omega_m * t);
        q[1][2] = pair;
        q[2][1] = pair;
    }
    (m, q)
}

fn max_abs_diff(a: &MomentState, b: &MomentState) -> f64 {
    a.m.iter()
        .zip(&b.m)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn arb_state() -> impl Strategy<Value = MomentState> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 12).prop_map(|v| {
        let mut s = MomentState::default();
        for (k, (re, im)) in v.into_iter().enumerate() {
            s.m[k] = c(re, im);
        }
        for k in 0..3 {
            s.m[k].im = 0.0;
        }
        s
    })
}

fn arb_system() -> impl Strategy<Value = SystemParams> {
    (
        -0.3..0.3f64,
        0.0..0.05f64,
        0.0..0.05f64,
        0.0..1e-3f64,
        0.0..100.0f64,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(
            |(delta, kappa1, kappa2, gamma_m, n_bar, cr, sta)| SystemParams {
                delta,
                kappa1,
                kappa2,
                gamma_m,
                n_bar,
                include_counter_rotating: cr,
                sta_enabled: sta,
                ..SystemParams::default()
            },
        )
}

fn arb_couplings() -> impl Strategy<Value = Couplings> {
    (-0.2..0.2f64, -0.2..0.2f64, -0.2..0.2f64, -0.2..0.2f64).prop_map(|(j, g2, re, im)| Couplings {
        j,
        g2,
        g1: c(re, im),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn moment_rhs_matches_generic_quadratic_form(
        y in arb_state(), sys in arb_system(), cp in arb_couplings(), t in -100.0..100.0f64
    ) {
        let ours = moment_rhs(t, &y, &sys, &cp).unwrap();
        let (m, q) = generic_matrices(t, &sys, cp);
        let k = [sys.kappa1, sys.kappa2, sys.gamma_m];
        let reference = generic_rhs(&m, &q, k, sys.gamma_m * sys.n_bar, &y);
        let scale = y.m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_abs_diff(&ours, &reference) <= 1e-12 * scale, "{:?} vs {:?}", ours, reference);
    }

    #[test]
    fn moment_rhs_matches_lindblad_generator(
        amps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 10),
        sys in arb_system(),
        cp in arb_couplings(),
        t in -100.0..100.0f64,
    ) {
        // Pure states with at most two excitations in total stay clear of the
        // truncation edge under one application of the generator.
        let dims = FockDims { d1: 4, d2: 4, db: 6 };
        let space = FockSpace::new(dims);
        let support = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)];
        let mut psi = vec![c(0.0, 0.0); space.dim()];
        for (&(n1, n2, nb), &(re, im)) in support.iter().zip(&amps) {
            psi[dims.index(n1, n2, nb)] = c(re, im);
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        for z in &mut psi {
            *z /= norm;
        }
        let rho = space.pure_density(&psi);
        let mut drho = vec![c(0.0, 0.0); rho.len()];
        space.lindblad_rhs(t, &rho, &sys, cp, &mut drho);
        let reference = space.moments(&drho);
        let ours = moment_rhs(t, &space.moments(&rho), &sys, &cp).unwrap();
        prop_assert!(max_abs_diff(&ours, &reference) <= 1e-12, "{:?} vs {:?}", ours, reference);
    }
}

#[test]
fn moment_dynamics_match_fock_oracle() {
    let dims = FockDims {
        d1: 4,
        d2: 4,
        db: 6,
    };
    let larger = FockDims {
        d1: 5,
        d2: 5,
        db: 7,
    };
    let opts = IntegrateOptions {
        grid_points: 400,
        ..IntegrateOptions::with_tolerances(1e-10, 1e-12)
    };
    for sta in [true, false] {
        for cr in [true, false] {
            let (sys, sched, window) = small_scale(sta, cr);
            let init = initial_state(1.0).unwrap();
            let moments = integrate(&sys, &sched, &init, window, &opts).unwrap();
            let fock = fock_oracle(&sys, &sched, dims, &init, window, &opts).unwrap();
            let gap = worst_gap(&moments, &fock);
            assert!(gap <= 1e-4, "sta={sta} cr={cr}: {gap:e}");
            // The oracle itself must be converged in its cutoffs.
            let refined = fock_oracle(&sys, &sched, larger, &init, window, &opts).unwrap();
            let truncation = worst_gap(&fock, &refined);
            assert!(truncation <= 1e-4, "sta={sta} cr={cr}: {truncation:e}");
            assert!(
                worst_gap(&moments, &refined) <= gap.max(1e-6),
                "sta={sta} cr={cr}"
            );
        }
    }
}

#[test]
fn fock_oracle_agrees_from_coherent_superposition() {
    // A state with nonzero off-diagonal moments exercises every coupling.
    let dims = FockDims {
        d1: 4,
        d2: 4,
        db: 6,
    };
    let space = FockSpace::new(dims);
    let mut psi = vec![c(0.0, 0.0); space.dim()];
    psi[dims.index(0, 0, 1)] = c(0.8, 0.0);
    psi[dims.index(1, 0, 0)] = c(0.0, 0.36);
    psi[dims.index(0, 1, 1)] = c(0.3, -0.2);
    psi[dims.index(0, 0, 0)] = c(0.3, 0.0);
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    let rho = space.pure_density(&psi);
    let (sys, sched, window) = small_scale(true, true);
    let opts = IntegrateOptions {
        grid_points: 200,
        ..IntegrateOptions::with_tolerances(1e-10, 1e-12)
    };
    let fock = fock_oracle_from_density(&sys, &sched, dims, rho.clone(), window, &opts).unwrap();
    let moments = integrate(&sys, &sched, &space.moments(&rho), window, &opts).unwrap();
    for k in 0..moments.times.len() {
        assert!((moments.pb[k] - fock.pb[k]).abs() < 1e-4);
        assert!((moments.p1[k] - fock.p1[k]).abs() < 1e-4);
        assert!((moments.p2[k] - fock.p2[k]).abs() < 1e-4);
    }
}

#[test]
fn closed_rotating_wave_system_conserves_excitations() {
    for family in Family::ALL {
        for sta in [true, false] {
            let mut cfg = scenarios::sta(family, false);
            cfg.system.include_counter_rotating = false;
            cfg.system.sta_enabled = sta;
            let sched = CouplingSchedule::new(cfg.protocol);
            let run = integrate(
                &cfg.system,
                &sched,
                &initial_state(1e4).unwrap(),
                cfg.window(),
                &IntegrateOptions::default(),
            )
            .unwrap();
            for k in 0..run.times.len() {
                let total = run.p1[k] + run.p2[k] + run.pb[k];
                assert!(
                    (total - 1e4).abs() / 1e4 <= 1e-7,
                    "{family} sta={sta}: {total}"
                );
            }
        }
    }
}

#[test]
fn hermiticity_and_positivity_hold_on_preset_scenarios() {
    for family in Family::ALL {
        for cfg in [
            scenarios::stirap(family),
            scenarios::sta(family, false),
            scenarios::sta(family, true),
        ] {
            let sched = CouplingSchedule::new(cfg.protocol);
            let run = integrate(
                &cfg.system,
                &sched,
                &initial_state(cfg.n0).unwrap(),
                cfg.window(),
                &IntegrateOptions::default(),
            )
            .unwrap();
            let d = &run.diagnostics;
            assert!(
                d.max_number_imag <= 1e-8 * cfg.n0,
                "{}: {}",
                cfg.label(),
                d.max_number_imag
            );
            assert!(d.min_number >= -1e-8, "{}: {}", cfg.label(), d.min_number);
        }
    }
}

#[test]
fn halving_tolerances_leaves_final_occupation_unchanged() {
    let mut worst: f64 = 0.0;
    for family in Family::ALL {
        for cfg in [
            scenarios::stirap(family),
            scenarios::sta(family, false),
            scenarios::sta(family, true),
        ] {
            let sched = CouplingSchedule::new(cfg.protocol);
            let init = initial_state(cfg.n0).unwrap();
            let once = integrate(
                &cfg.system,
                &sched,
                &init,
                cfg.window(),
                &IntegrateOptions::default(),
            )
            .unwrap();
            let halved = integrate(
                &cfg.system,
                &sched,
                &init,
                cfg.window(),
                &IntegrateOptions::with_tolerances(0.5 * DEFAULT_RTOL, 0.5 * DEFAULT_ATOL),
            )
            .unwrap();
            let rel = (once.pb_final - halved.pb_final).abs() / halved.pb_final;
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn sta_widths_without_counterdiabatic_channel_do_not_cool() {
    for family in Family::ALL {
        let cfg = scenarios::sta_no_cd(family);
        let sched = CouplingSchedule::new(cfg.protocol);
        let run = integrate(
            &cfg.system,
            &sched,
            &initial_state(cfg.n0).unwrap(),
            cfg.window(),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(run.pb_final > 100.0, "{family}: {}", run.pb_final);
    }
}
