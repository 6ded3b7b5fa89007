//! Gaussian dynamics under the strong-RWA master equation.
//!
//! Each normal mode relaxes independently: quadrature pairs `(Q_n, P_n)` obey
//! `d/dt x = A_n x` with `A_n = [[−Γ_n/2, 1], [−Ω_n², −Γ_n/2]]` and the
//! covariance receives the diffusion `diag(D_n/(2Ω_n²), D_n/2)`. Since `A_n`
//! splits into a multiple of the identity plus a rotation generator, the
//! propagator is available in closed form and no time stepping is needed.

use nalgebra::{DMatrix, Matrix2, Matrix6, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{thermal_factor, BathParams, NormalModes};
use crate::symplectic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Natural,
    Normal,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Natural => "natural",
            Basis::Normal => "normal",
        }
    }
}

/// Gaussian state of the chain: ordering `(q1, q2, q3, p1, p2, p3)` in the
/// natural basis or `(Q1, Q2, Q3, P1, P2, P3)` in the normal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub basis: Basis,
    pub mean: Vector6<f64>,
    pub cov: Matrix6<f64>,
}

impl GaussianState {
    pub fn new(basis: Basis, mean: Vector6<f64>, cov: Matrix6<f64>) -> Result<Self> {
        let asym = (cov - cov.transpose()).amax();
        if asym > 1e-12 * cov.amax().max(1.0) {
            return Err(Error::NonPhysical(format!(
                "covariance is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self { basis, mean, cov })
    }

    /// The three symplectic eigenvalues, ascending (1/2 for pure states).
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 3]> {
        let cov = DMatrix::from_iterator(6, 6, self.cov.iter().copied());
        let nu = symplectic::symplectic_eigenvalues(&cov, &symplectic::form_block(3))?;
        Ok([nu[0], nu[1], nu[2]])
    }

    /// Uncertainty relation with slack `1e-9`.
    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues()
            .map(|nu| nu[0] >= 0.5 - 1e-9)
            .unwrap_or(false)
    }

    /// `⟨x_k²⟩` for quadrature index `k` (0..6), including the mean.
    pub fn second_moment(&self, k: usize) -> f64 {
        self.cov[(k, k)] + self.mean[k] * self.mean[k]
    }

    /// Determinant of the `(x_n, p_n)` block of mode or oscillator `n` (0..3).
    pub fn single_mode_det(&self, n: usize) -> f64 {
        let b = self.block(n, n);
        b.determinant()
    }

    /// 2×2 covariance block between sites `m` and `n` in `(x, p)` order.
    pub fn block(&self, m: usize, n: usize) -> Matrix2<f64> {
        Matrix2::new(
            self.cov[(m, n)],
            self.cov[(m, n + 3)],
            self.cov[(m + 3, n)],
            self.cov[(m + 3, n + 3)],
        )
    }
}

/// Separable squeezed vacuum: `⟨q_i²⟩ = e^{−2r_i}/(2ω_i)`,
/// `⟨p_i²⟩ = ω_i e^{2r_i}/2`.
pub fn squeezed_vacuum(omega_sq: [f64; 3], r: [f64; 3]) -> Result<GaussianState> {
    let mut cov = Matrix6::zeros();
    for i in 0..3 {
        if !(omega_sq[i] > 0.0) || !r[i].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeezed vacuum needs ω² > 0 and finite r, got ω² = {}, r = {}",
                omega_sq[i], r[i]
            )));
        }
        let w = omega_sq[i].sqrt();
        cov[(i, i)] = (-2.0 * r[i]).exp() / (2.0 * w);
        cov[(i + 3, i + 3)] = w * (2.0 * r[i]).exp() / 2.0;
    }
    Ok(GaussianState {
        basis: Basis::Natural,
        mean: Vector6::zeros(),
        cov,
    })
}

fn block_diag(f: &nalgebra::Matrix3<f64>) -> Matrix6<f64> {
    let mut s = Matrix6::zeros();
    s.fixed_view_mut::<3, 3>(0, 0).copy_from(f);
    s.fixed_view_mut::<3, 3>(3, 3).copy_from(f);
    s
}

/// Moves a state between the natural and normal-mode bases.
pub fn change_basis(state: &GaussianState, modes: &NormalModes, to: Basis) -> Result<GaussianState> {
    if state.basis == to {
        return Err(Error::BasisMismatch {
            expected: match to {
                Basis::Natural => Basis::Normal.as_str(),
                Basis::Normal => Basis::Natural.as_str(),
            },
            found: state.basis.as_str(),
        });
    }
    let s = match to {
        Basis::Normal => block_diag(&modes.f.transpose()),
        Basis::Natural => block_diag(&modes.f),
    };
    let cov = s * state.cov * s.transpose();
    Ok(GaussianState {
        basis: to,
        mean: s * state.mean,
        cov: (cov + cov.transpose()) * 0.5,
    })
}

/// Per-mode master-equation coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmeCoefficients {
    pub omega: [f64; 3],
    /// Damping `Γ_n = γκ_n²`; zero for free modes.
    pub gamma: [f64; 3],
    /// Diffusion `D_n = γκ_n²Ω_n coth(Ω_n/2T)`; zero for free modes.
    pub diffusion: [f64; 3],
    /// Modes below the coupling threshold, evolving unitarily.
    pub free: [bool; 3],
    /// Stationary `(⟨Q²⟩, ⟨P²⟩)` of each damped mode; `None` for free modes.
    pub stationary: [Option<(f64, f64)>; 3],
}

impl MmeCoefficients {
    pub fn drift_block(&self, n: usize) -> Matrix2<f64> {
        let g = -0.5 * self.gamma[n];
        Matrix2::new(g, 1.0, -self.omega[n] * self.omega[n], g)
    }

    pub fn diffusion_block(&self, n: usize) -> Matrix2<f64> {
        let d = self.diffusion[n];
        if d == 0.0 {
            return Matrix2::zeros();
        }
        Matrix2::new(d / (2.0 * self.omega[n] * self.omega[n]), 0.0, 0.0, d / 2.0)
    }

    /// Full drift matrix in the `(Q, P)` ordering.
    pub fn drift_matrix(&self) -> Matrix6<f64> {
        assemble(|n| self.drift_block(n))
    }

    pub fn diffusion_matrix(&self) -> Matrix6<f64> {
        assemble(|n| self.diffusion_block(n))
    }

    /// Stationary covariance; free-mode blocks are zero.
    pub fn stationary_cov(&self) -> Matrix6<f64> {
        assemble(|n| match self.stationary[n] {
            Some((q, p)) => Matrix2::new(q, 0.0, 0.0, p),
            None => Matrix2::zeros(),
        })
    }

    /// Smallest non-zero damping rate, if any mode is damped.
    pub fn gamma_min(&self) -> Option<f64> {
        self.gamma
            .iter()
            .zip(&self.free)
            .filter(|(_, &f)| !f)
            .map(|(g, _)| *g)
            .min_by(f64::total_cmp)
    }

    /// `e^{At}` in the `(Q, P)` ordering.
    pub fn propagator(&self, t: f64) -> Matrix6<f64> {
        assemble(|n| {
            let w = self.omega[n];
            let (s, c) = (w * t).sin_cos();
            let decay = (-0.5 * self.gamma[n] * t).exp();
            Matrix2::new(c, s / w, -w * s, c) * decay
        })
    }
}

/// Places per-mode 2×2 blocks on the `(n, n+3)` index pairs.
fn assemble(block: impl Fn(usize) -> Matrix2<f64>) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for n in 0..3 {
        let b = block(n);
        m[(n, n)] = b[(0, 0)];
        m[(n, n + 3)] = b[(0, 1)];
        m[(n + 3, n)] = b[(1, 0)];
        m[(n + 3, n + 3)] = b[(1, 1)];
    }
    m
}

pub fn mme_coefficients(modes: &NormalModes, bath: &BathParams) -> Result<MmeCoefficients> {
    bath.validate()?;
    for n in 0..3 {
        if modes.omega[n] >= bath.cutoff {
            return Err(Error::CutoffViolation {
                mode: n + 1,
                omega: modes.omega[n],
                cutoff: bath.cutoff,
            });
        }
    }
    let mut gamma = [0.0; 3];
    let mut diffusion = [0.0; 3];
    let mut free = [false; 3];
    let mut stationary = [None; 3];
    for n in 0..3 {
        if modes.is_free(n) {
            free[n] = true;
            continue;
        }
        let w = modes.omega[n];
        let coth = thermal_factor(w, bath.temperature);
        let k2 = modes.kappa[n] * modes.kappa[n];
        gamma[n] = bath.gamma * k2;
        diffusion[n] = bath.gamma * k2 * w * coth;
        stationary[n] = Some((coth / (2.0 * w), w * coth / 2.0));
    }
    Ok(MmeCoefficients {
        omega: modes.omega,
        gamma,
        diffusion,
        free,
        stationary,
    })
}

fn check_normal(state: &GaussianState) -> Result<()> {
    if state.basis != Basis::Normal {
        return Err(Error::BasisMismatch {
            expected: Basis::Normal.as_str(),
            found: state.basis.as_str(),
        });
    }
    Ok(())
}

/// Exact evolution for time `t ≥ 0`:
/// `cov(t) = e^{At}(cov(0) − V∞)e^{Aᵀt} + V∞`.
pub fn propagate(state: &GaussianState, coeffs: &MmeCoefficients, t: f64) -> Result<GaussianState> {
    check_normal(state)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "propagation time must be finite and >= 0, got {t}"
        )));
    }
    let e = coeffs.propagator(t);
    let v_inf = coeffs.stationary_cov();
    let cov = e * (state.cov - v_inf) * e.transpose() + v_inf;
    Ok(GaussianState {
        basis: Basis::Normal,
        mean: e * state.mean,
        cov: (cov + cov.transpose()) * 0.5,
    })
}

/// Evaluates `propagate` at each time independently, in parallel, preserving
/// the order of `times`.
pub fn propagate_grid(
    state: &GaussianState,
    coeffs: &MmeCoefficients,
    times: &[f64],
) -> Result<Vec<GaussianState>> {
    check_normal(state)?;
    times
        .par_iter()
        .map(|&t| propagate(state, coeffs, t))
        .collect()
}

/// Gibbs state of every normal mode at the bath temperature.
pub fn thermal_state(modes: &NormalModes, bath: &BathParams) -> GaussianState {
    let cov = assemble(|n| {
        let w = modes.omega[n];
        let coth = thermal_factor(w, bath.temperature);
        Matrix2::new(coth / (2.0 * w), 0.0, 0.0, w * coth / 2.0)
    });
    GaussianState {
        basis: Basis::Normal,
        mean: Vector6::zeros(),
        cov,
    }
}
