//! Three-level picture of the single-excitation dynamics: the coupling
//! matrix over `(a1, a2, b)`, its closed-form eigensystem, and the
//! counterdiabatic corrections.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::protocols::ProtocolParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("g0 = 0: the spectrum is degenerate and the mixing angles are undefined")]
    Degenerate,
}

/// Hermitian 3×3 matrix over the basis `|a1>, |a2>, |b>`, with the detuning
/// it was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix3 {
    pub entries: [[C64; 3]; 3],
    pub delta: f64,
}

impl CouplingMatrix3 {
    pub fn zero(delta: f64) -> Self {
        CouplingMatrix3 {
            entries: [[C64::new(0.0, 0.0); 3]; 3],
            delta,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn trace(&self) -> C64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }

    /// Largest `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &[C64; 3]) -> [C64; 3] {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.entries[i][j] * v[j]).sum();
        }
        out
    }

    fn add(mut self, other: &CouplingMatrix3) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.entries[i][j] += other.entries[i][j];
            }
        }
        self
    }
}

/// Instantaneous eigenpairs: the dark state and the two bright states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub e0: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub lambda0: [f64; 3],
    pub lambda_plus: [f64; 3],
    pub lambda_minus: [f64; 3],
}

impl EigenTriple {
    pub fn pairs(&self) -> [(f64, [f64; 3]); 3] {
        [
            (self.e0, self.lambda0),
            (self.e_plus, self.lambda_plus),
            (self.e_minus, self.lambda_minus),
        ]
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Bare coupling matrix `((0, J, 0), (J, delta, G2), (0, G2, 0))`.
pub fn coupling_matrix(j: f64, g2: f64, delta: f64) -> CouplingMatrix3 {
    let z = re(0.0);
    CouplingMatrix3 {
        entries: [[z, re(j), z], [re(j), re(delta), re(g2)], [z, re(g2), z]],
        delta,
    }
}

/// Closed-form eigensystem of [`coupling_matrix`].
///
/// The global sign of each vector is fixed so that the dark state has a
/// non-positive `|b>` component: `lambda0 = cos(theta)|a1> - sin(theta)|b>`.
pub fn eigensystem(j: f64, g2: f64, delta: f64) -> Result<EigenTriple, SpectralError> {
    let g0 = j.hypot(g2);
    if g0 == 0.0 {
        return Err(SpectralError::Degenerate);
    }
    let (st, ct) = (j / g0, g2 / g0);
    let phi = 0.5 * (2.0 * g0).atan2(delta);
    let (sp, cp) = phi.sin_cos();
    let s = (0.25 * delta * delta + g0 * g0).sqrt();
    // E+ = g0 cot(phi), E- = -g0 tan(phi); written to avoid cancellation.
    let (e_plus, e_minus) = if delta >= 0.0 {
        let big = s + 0.5 * delta;
        (big, -g0 * g0 / big)
    } else {
        let big = s - 0.5 * delta;
        (g0 * g0 / big, -big)
    };
    Ok(EigenTriple {
        e0: 0.0,
        e_plus,
        e_minus,
        lambda0: [ct, 0.0, -st],
        lambda_plus: [st * sp, cp, ct * sp],
        lambda_minus: [st * cp, -sp, ct * cp],
    })
}

/// Full counterdiabatic matrix `i * ((0, φ̇ sinθ, θ̇), (-φ̇ sinθ, 0, -φ̇ cosθ), (-θ̇, φ̇ cosθ, 0))`.
pub fn cd_matrix_full(theta_dot: f64, phi_dot: f64, theta: f64, delta: f64) -> CouplingMatrix3 {
    let (st, ct) = theta.sin_cos();
    let i = |x: f64| C64::new(0.0, x);
    let z = re(0.0);
    CouplingMatrix3 {
        entries: [
            [z, i(phi_dot * st), i(theta_dot)],
            [i(-phi_dot * st), z, i(-phi_dot * ct)],
            [i(-theta_dot), i(phi_dot * ct), z],
        ],
        delta,
    }
}

/// Counterdiabatic matrix restricted to the direct `a1`–`b` channel.
pub fn cd_matrix_simplified(theta_dot: f64, delta: f64) -> CouplingMatrix3 {
    let mut m = CouplingMatrix3::zero(delta);
    m.entries[0][2] = C64::new(0.0, theta_dot);
    m.entries[2][0] = C64::new(0.0, -theta_dot);
    m
}

/// Bare couplings plus the simplified counterdiabatic term:
/// `((0, J, iθ̇), (J, δ, G2), (-iθ̇, G2, 0))`.
pub fn total_matrix(j: f64, g2: f64, delta: f64, theta_dot: f64) -> CouplingMatrix3 {
    coupling_matrix(j, g2, delta).add(&cd_matrix_simplified(theta_dot, delta))
}

/// Full STA generator `M + M_cd` for a protocol at time `t`.
pub fn full_sta_matrix(p: &ProtocolParams, t: f64, delta: f64) -> CouplingMatrix3 {
    let d = p.derivatives(t);
    let g0 = d.j.hypot(d.g2);
    let theta = d.j.atan2(d.g2);
    let phi_dot = if g0 > 0.0 {
        (d.dj * d.j + d.dg2 * d.g2) * delta / ((delta * delta + 4.0 * g0 * g0) * g0)
    } else {
        0.0
    };
    coupling_matrix(d.j, d.g2, delta).add(&cd_matrix_full(p.theta_rate(t), phi_dot, theta, delta))
}

/// Largest `|theta_dot|` over the protocol window.
pub fn max_theta_dot(p: &ProtocolParams) -> f64 {
    p.max_theta_dot()
}
