//! System Hamiltonian, normal-mode decomposition and effective bath couplings.
//!
//! Positions and momenta of the three oscillators are related to the normal
//! coordinates by an orthogonal matrix `F` (`q = F Q`, `p = F P`). A mode's
//! coupling to the common bath is the weighted column sum of `F`; a mode with
//! vanishing coupling evolves unitarily.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base tolerance for treating an effective coupling as zero, in units where
/// the central oscillator frequency is one. Scaled by the bath weights.
pub const NS_TOL: f64 = 1e-9;

/// Relative eigenvalue separation below which two normal modes are treated
/// as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

fn unit_weights() -> [f64; 3] {
    [1.0; 3]
}

/// Hamiltonian parameters of the chain: squared frequencies, pairwise
/// position couplings (all in frequency² units) and per-oscillator bath
/// weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_sq: [f64; 3],
    pub lambda12: f64,
    pub lambda13: f64,
    pub lambda23: f64,
    #[serde(default = "unit_weights")]
    pub bath_weights: [f64; 3],
}

impl SystemParams {
    /// Couplings are given in the order `(λ12, λ13, λ23)`.
    pub fn new(omega_sq: [f64; 3], couplings: [f64; 3]) -> Self {
        Self {
            omega_sq,
            lambda12: couplings[0],
            lambda13: couplings[1],
            lambda23: couplings[2],
            bath_weights: unit_weights(),
        }
    }

    pub fn from_frequencies(omega: [f64; 3], couplings: [f64; 3]) -> Self {
        Self::new(omega.map(|w| w * w), couplings)
    }

    /// Open chain (`λ13 = 0`) with equal couplings `λ12 = λ23 = lambda`.
    pub fn open_chain(omega: [f64; 3], lambda: f64) -> Self {
        Self::from_frequencies(omega, [lambda, 0.0, lambda])
    }

    pub fn with_weights(mut self, weights: [f64; 3]) -> Self {
        self.bath_weights = weights;
        self
    }

    pub fn couplings(&self) -> [f64; 3] {
        [self.lambda12, self.lambda13, self.lambda23]
    }

    /// Natural frequencies `ω_i`. Non-positive `ω_i²` map to NaN.
    pub fn frequencies(&self) -> [f64; 3] {
        self.omega_sq.map(|w2| if w2 > 0.0 { w2.sqrt() } else { f64::NAN })
    }

    /// Tolerance below which `|κ_n|` counts as zero for these weights.
    pub fn kappa_tol(&self) -> f64 {
        NS_TOL * self.bath_weights.iter().map(|g| g.abs()).sum::<f64>()
    }

    fn check_finite(&self) -> Result<()> {
        let couplings = self.couplings();
        let mut all = self
            .omega_sq
            .iter()
            .chain(couplings.iter())
            .chain(self.bath_weights.iter());
        if all.any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "system parameters must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Assembles the symmetric matrix `𝓗` with `ω_i²` on the diagonal and
/// `λ_ij` off the diagonal, rejecting non-positive-definite inputs.
pub fn build_hamiltonian(params: &SystemParams) -> Result<Matrix3<f64>> {
    params.check_finite()?;
    let [w1, w2, w3] = params.omega_sq;
    let (l12, l13, l23) = (params.lambda12, params.lambda13, params.lambda23);
    let h = Matrix3::new(w1, l12, l13, l12, w2, l23, l13, l23, w3);
    let min_eigenvalue = h.symmetric_eigenvalues().min();
    if min_eigenvalue <= 0.0 {
        return Err(Error::Positivity { min_eigenvalue });
    }
    Ok(h)
}

/// Normal-mode decomposition of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    /// Orthogonal mode matrix; column `n` is mode `n` in the natural basis.
    pub f: Matrix3<f64>,
    /// Normal frequencies `Ω_n`, ascending.
    pub omega: [f64; 3],
    pub omega_sq: [f64; 3],
    /// Effective bath couplings `κ_n = Σ_i γ_i F_in`.
    pub kappa: [f64; 3],
    /// Zero threshold for `|κ_n|`, inherited from the bath weights.
    pub kappa_tol: f64,
}

impl NormalModes {
    pub fn mode_vector(&self, n: usize) -> Vector3<f64> {
        self.f.column(n).into_owned()
    }

    /// Whether mode `n` is decoupled from the bath.
    pub fn is_free(&self, n: usize) -> bool {
        self.kappa[n].abs() < self.kappa_tol
    }

    pub fn free_count(&self) -> usize {
        (0..3).filter(|&n| self.is_free(n)).count()
    }

    pub fn min_abs_kappa(&self) -> f64 {
        self.kappa.iter().fold(f64::INFINITY, |m, k| m.min(k.abs()))
    }

    /// Index of the mode with the smallest `|κ|`.
    pub fn weakest_mode(&self) -> usize {
        (0..3)
            .min_by(|&a, &b| self.kappa[a].abs().total_cmp(&self.kappa[b].abs()))
            .unwrap()
    }

    /// `F · diag(Ω²) · Fᵀ`, which reproduces `𝓗`.
    pub fn reconstruct(&self) -> Matrix3<f64> {
        let d = Matrix3::from_diagonal(&Vector3::from(self.omega_sq));
        self.f * d * self.f.transpose()
    }

    pub fn decay_ratio(&self) -> f64 {
        decay_ratio(self)
    }
}

/// Diagonalizes `𝓗` and computes effective couplings.
///
/// Modes are sorted by ascending frequency. Within a degenerate eigenspace the
/// basis is rotated so that a single vector carries all of the bath coupling
/// and the remaining ones have `κ = 0`; these are listed first. Each column is
/// signed so that its largest-magnitude component (first one on ties) is
/// positive.
pub fn normal_modes(params: &SystemParams) -> Result<NormalModes> {
    let h = build_hamiltonian(params)?;
    let weights = Vector3::from(params.bath_weights);

    let eig = SymmetricEigen::new(h);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs: Vec<Vector3<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let scale = vals[2].abs();
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && (vals[end] - vals[end - 1]).abs() < DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let rotated = split_degenerate(&vecs[start..end], &weights);
            for (k, v) in rotated.into_iter().enumerate() {
                vals[start + k] = (v.transpose() * h * v)[0];
                vecs[start + k] = v;
            }
        }
        start = end;
    }

    let mut f = Matrix3::zeros();
    for (n, v) in vecs.iter().enumerate() {
        f.set_column(n, &fix_sign(*v));
    }
    let omega_sq = [vals[0], vals[1], vals[2]];
    let kappa_v = f.transpose() * weights;
    Ok(NormalModes {
        f,
        omega: omega_sq.map(f64::sqrt),
        omega_sq,
        kappa: [kappa_v[0], kappa_v[1], kappa_v[2]],
        kappa_tol: params.kappa_tol(),
    })
}

/// Rotates an orthonormal basis of a degenerate eigenspace so that all but
/// one vector are orthogonal to the bath weights. Zero-coupling vectors come
/// first.
fn split_degenerate(basis: &[Vector3<f64>], weights: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let k = basis.len();
    let proj: Vec<f64> = basis.iter().map(|u| u.dot(weights)).collect();
    let norm = proj.iter().map(|p| p * p).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return basis.to_vec();
    }
    let lead: Vec<f64> = proj.iter().map(|p| p / norm).collect();

    // Gram-Schmidt of unit coefficient vectors against `lead`.
    let mut coeffs: Vec<Vec<f64>> = vec![lead.clone()];
    for axis in 0..k {
        if coeffs.len() == k {
            break;
        }
        let mut c = vec![0.0; k];
        c[axis] = 1.0;
        for b in &coeffs {
            let d: f64 = c.iter().zip(b).map(|(x, y)| x * y).sum();
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci -= d * bi;
            }
        }
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            coeffs.push(c.into_iter().map(|x| x / n).collect());
        }
    }
    coeffs.rotate_left(1);
    coeffs
        .iter()
        .map(|c| {
            c.iter()
                .zip(basis)
                .fold(Vector3::zeros(), |acc, (ci, u)| acc + u * *ci)
        })
        .collect()
}

fn fix_sign(v: Vector3<f64>) -> Vector3<f64> {
    let max = v.amax();
    let lead = v.iter().find(|x| x.abs() >= max - 1e-12).copied().unwrap_or(0.0);
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

/// Ratio `κ0²/κ1²` of the two smallest squared effective couplings.
///
/// Couplings below the zero threshold count as exactly zero, so a chain with
/// a protected mode has `R = 0`. Two protected modes also give `R = 0`.
pub fn decay_ratio(modes: &NormalModes) -> f64 {
    let tol = modes.kappa_tol;
    let mut k2: Vec<f64> = modes
        .kappa
        .iter()
        .map(|k| if k.abs() < tol { 0.0 } else { k * k })
        .collect();
    k2.sort_by(f64::total_cmp);
    if k2[0] == 0.0 || k2[1] == 0.0 {
        return 0.0;
    }
    k2[0] / k2[1]
}

/// Bath temperature `T` (with `k_B = 1`), coupling strength `γ` and Ohmic
/// sharp cutoff `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub temperature: f64,
    pub gamma: f64,
    pub cutoff: f64,
}

impl BathParams {
    pub fn new(temperature: f64, gamma: f64, cutoff: f64) -> Result<Self> {
        let bath = Self {
            temperature,
            gamma,
            cutoff,
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be finite and >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling strength must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be > 0, got {}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// `coth(Ω / 2T)`, equal to one at zero temperature.
pub fn thermal_factor(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    1.0 / (omega / (2.0 * temperature)).tanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn uncoupled_unit_oscillators_give_identity() {
        let p = SystemParams::new([1.0; 3], [0.0; 3]);
        assert_eq!(build_hamiltonian(&p).unwrap(), Matrix3::identity());
    }

    #[test]
    fn hamiltonian_layout() {
        let p = SystemParams::from_frequencies([1.0, 1.2, 1.0], [0.6, 0.0, 0.6]);
        let h = build_hamiltonian(&p).unwrap();
        let expected = Matrix3::new(1.0, 0.6, 0.0, 0.6, 1.44, 0.6, 0.0, 0.6, 1.0);
        assert!((h - expected).amax() < 1e-15);
    }

    #[test]
    fn attractive_potential_required() {
        let p = SystemParams::new([1.0; 3], [-1.0; 3]);
        match build_hamiltonian(&p) {
            Err(Error::Positivity { min_eigenvalue }) => assert_close(min_eigenvalue, -1.0, 1e-12),
            other => panic!("expected positivity error, got {other:?}"),
        }
        assert!(matches!(normal_modes(&p), Err(Error::Positivity { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let p = SystemParams::new([1.0, f64::NAN, 1.0], [0.0; 3]);
        assert!(matches!(build_hamiltonian(&p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn distinct_uncoupled_modes_are_the_oscillators() {
        let p = SystemParams::new([2.0, 1.0, 3.0], [0.0; 3]);
        let m = normal_modes(&p).unwrap();
        assert_eq!(m.omega_sq, [1.0, 2.0, 3.0]);
        // ascending Ω reorders the oscillators as (2, 1, 3)
        let expected = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((m.f - expected).amax() < 1e-15);
        for k in m.kappa {
            assert_close(k, 1.0, 1e-15);
        }
    }

    #[test]
    fn symmetric_open_chain_has_antisymmetric_free_mode() {
        let p = SystemParams::open_chain([1.3, 1.0, 1.3], 0.4);
        let m = normal_modes(&p).unwrap();
        let n = (0..3).find(|&n| m.is_free(n)).expect("a free mode");
        assert_close(m.omega[n], 1.3, 1e-12);
        let v = m.mode_vector(n);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v - Vector3::new(s, 0.0, -s)).amax() < 1e-12);
        assert!(m.kappa[n].abs() < 1e-15);
    }

    #[test]
    fn fully_symmetric_chain_has_center_of_mass_mode() {
        let p = SystemParams::new([1.5; 3], [0.2; 3]);
        let m = normal_modes(&p).unwrap();
        // the centre of mass is the top mode, the other two are degenerate and free
        let cm = m.mode_vector(2);
        let s = 1.0 / 3f64.sqrt();
        assert!((cm - Vector3::new(s, s, s)).amax() < 1e-12);
        assert_close(m.kappa[2], 3f64.sqrt(), 1e-12);
        assert!(m.is_free(0) && m.is_free(1));
        assert_close(m.omega_sq[2], 1.9, 1e-12);
        assert_close(m.omega_sq[0], 1.3, 1e-12);
    }

    #[test]
    fn fully_degenerate_uncoupled_chain() {
        let p = SystemParams::new([1.0; 3], [0.0; 3]);
        let m = normal_modes(&p).unwrap();
        assert_eq!(m.free_count(), 2);
        assert!((m.f.transpose() * m.f - Matrix3::identity()).amax() < 1e-12);
        assert_close(m.kappa[2], 3f64.sqrt(), 1e-12);
    }

    #[test]
    fn sign_convention_tie_takes_first_component() {
        let v = fix_sign(Vector3::new(-0.5, 0.0, 0.5));
        assert_eq!(v, Vector3::new(0.5, 0.0, -0.5));
        let v = fix_sign(Vector3::new(0.1, -0.9, 0.2));
        assert_eq!(v, Vector3::new(-0.1, 0.9, -0.2));
    }

    #[test]
    fn decay_ratio_examples() {
        let mk = |kappa: [f64; 3]| NormalModes {
            f: Matrix3::identity(),
            omega: [1.0; 3],
            omega_sq: [1.0; 3],
            kappa,
            kappa_tol: 3e-9,
        };
        assert_eq!(decay_ratio(&mk([0.0, 0.5, 1.2])), 0.0);
        assert_close(decay_ratio(&mk([0.3, 0.6, 1.0])), 0.25, 1e-15);
        assert_close(decay_ratio(&mk([1.0, -0.6, 0.3])), 0.25, 1e-15);
        assert_eq!(decay_ratio(&mk([0.0, 0.0, 3f64.sqrt()])), 0.0);
    }

    #[test]
    fn unbalanced_weights_enter_couplings() {
        let p = SystemParams::open_chain([1.3, 1.0, 1.3], 0.4).with_weights([1.0, 1.0, 0.5]);
        let m = normal_modes(&p).unwrap();
        let expected = m.f.transpose() * Vector3::new(1.0, 1.0, 0.5);
        for n in 0..3 {
            assert_eq!(m.kappa[n], expected[n]);
        }
        // the antisymmetric mode is no longer protected
        assert_eq!(m.free_count(), 0);
    }

    #[test]
    fn bath_validation() {
        assert!(BathParams::new(0.0, 0.07, 50.0).is_ok());
        assert!(BathParams::new(-1.0, 0.07, 50.0).is_err());
        assert!(BathParams::new(1.0, 0.0, 50.0).is_err());
        assert!(BathParams::new(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn thermal_factor_limits() {
        assert_eq!(thermal_factor(1.0, 0.0), 1.0);
        assert_close(thermal_factor(1.0, 10.0), 1.0 / 0.05f64.tanh(), 1e-12);
        // high temperature: coth(x) ≈ 1/x
        assert_close(thermal_factor(1.0, 1e4) / 2e4, 1.0, 1e-8);
    }
}
