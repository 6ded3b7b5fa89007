//! Long-time entanglement of the outer pair when some modes are protected.
//!
//! Damped modes reach the Gibbs state while protected ones keep rotating, so
//! the asymptotic pair covariance is periodic (one protected mode) or
//! quasi-periodic (two) in time. Closed forms cover the symmetric open chains
//! with one and two protected modes; `AsymptoticModel` builds the same state
//! directly for any parameter set.

use nalgebra::{Matrix4, Matrix6};
use serde::{Deserialize, Serialize};

use crate::correlations::{log_negativity, min_symplectic_eig, PairCovariance};
use crate::dynamics::{change_basis, squeezed_vacuum, Basis};
use crate::error::{Error, Result};
use crate::lattice::{normal_modes, thermal_factor, NormalModes, SystemParams};

/// Symmetric open chain `ω1 = ω3 = ω`, `λ12 = λ23 = λ`, with the single
/// protected mode `(1, 0, −1)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneModeNsSpec {
    pub omega: f64,
    pub omega2: f64,
    pub lambda: f64,
}

/// Shape data of the two damped modes `(λ, Ω±² − ω², λ)·c±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedShapes {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub c_plus_sq: f64,
    pub c_minus_sq: f64,
}

impl OneModeNsSpec {
    pub fn new(omega: f64, omega2: f64, lambda: f64) -> Result<Self> {
        let spec = Self {
            omega,
            omega2,
            lambda,
        };
        if !(omega > 0.0 && omega2 > 0.0) || !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need ω, ω2 > 0 and λ ≠ 0, got ({omega}, {omega2}, {lambda})"
            )));
        }
        normal_modes(&spec.params())?;
        Ok(spec)
    }

    pub fn params(&self) -> SystemParams {
        SystemParams::open_chain([self.omega, self.omega2, self.omega], self.lambda)
    }

    pub fn shapes(&self) -> DampedShapes {
        let (w2, v2, l) = (self.omega * self.omega, self.omega2 * self.omega2, self.lambda);
        let eps = (0.5 * (v2 - w2)).powi(2) + 2.0 * l * l;
        let mid = 0.5 * (v2 + w2);
        let (p2, m2) = (mid + eps.sqrt(), mid - eps.sqrt());
        DampedShapes {
            omega_plus: p2.sqrt(),
            omega_minus: m2.sqrt(),
            c_plus_sq: 1.0 / (2.0 * l * l + (p2 - w2).powi(2)),
            c_minus_sq: 1.0 / (2.0 * l * l + (m2 - w2).powi(2)),
        }
    }
}

/// Symmetric open chain tuned to `λ = ω² − ω2²`: protected modes
/// `(1, 0, −1)/√2` and `(1, −2, 1)/√6`, damped centre of mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeNsSpec {
    pub omega: f64,
    pub omega2: f64,
}

impl TwoModeNsSpec {
    pub fn new(omega: f64, omega2: f64) -> Result<Self> {
        if !(omega > 0.0 && omega2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need ω, ω2 > 0, got ({omega}, {omega2})"
            )));
        }
        let (w2, v2) = (omega * omega, omega2 * omega2);
        if !(2.0 * v2 > w2 && 2.0 * w2 > v2) {
            return Err(Error::Regime(format!(
                "two protected modes need 2ω2² > ω² and 2ω² > ω2², got ω = {omega}, ω2 = {omega2}"
            )));
        }
        Ok(Self { omega, omega2 })
    }

    pub fn lambda(&self) -> f64 {
        self.omega * self.omega - self.omega2 * self.omega2
    }

    pub fn params(&self) -> SystemParams {
        SystemParams::open_chain([self.omega, self.omega2, self.omega], self.lambda())
    }

    pub fn omega_epsilon(&self) -> f64 {
        (2.0 * self.omega2 * self.omega2 - self.omega * self.omega).sqrt()
    }

    pub fn omega_cm(&self) -> f64 {
        (2.0 * self.omega * self.omega - self.omega2 * self.omega2).sqrt()
    }

    /// `𝒥±` at squeezing `r`.
    pub fn j_pm(&self, r: f64) -> (f64, f64) {
        let (w, v) = (self.omega, self.omega2);
        let oe2 = 2.0 * v * v - w * w;
        let up = (2.0 * r).exp() * (2.0 * v + w) / oe2;
        let down = (-2.0 * r).exp() * (2.0 * w + v) / (w * v);
        ((up + down) / (12.0 * w), (up - down) / (12.0 * w))
    }
}

/// Thermal weights `(σ_Q, σ_P)` of the damped modes on the outer pair.
pub trait SigmaCoefficients {
    fn sigma_coefficients(&self, temperature: f64) -> (f64, f64);
}

impl SigmaCoefficients for OneModeNsSpec {
    fn sigma_coefficients(&self, temperature: f64) -> (f64, f64) {
        let s = self.shapes();
        let w = self.omega;
        let mut sq = 0.0;
        let mut sp = 0.0;
        for (om, c2) in [(s.omega_plus, s.c_plus_sq), (s.omega_minus, s.c_minus_sq)] {
            let coth = thermal_factor(om, temperature);
            sq += w / (2.0 * om) * c2 * coth;
            sp += om / (2.0 * w) * c2 * coth;
        }
        (sq, sp)
    }
}

impl SigmaCoefficients for TwoModeNsSpec {
    fn sigma_coefficients(&self, temperature: f64) -> (f64, f64) {
        let cm = self.omega_cm();
        let coth = thermal_factor(cm, temperature);
        (self.omega / (6.0 * cm) * coth, cm / (6.0 * self.omega) * coth)
    }
}

pub fn sigma_coefficients(spec: &impl SigmaCoefficients, temperature: f64) -> (f64, f64) {
    spec.sigma_coefficients(temperature)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSqueezings {
    pub r0_plus: f64,
    pub r0_minus: f64,
    pub r_c: f64,
}

/// `r₀⁺ = ½ln(4λ²σ_Q)`, `r₀⁻ = −½ln(4λ²σ_P)`, `r_c = (r₀⁺ + r₀⁻)/4`.
pub fn critical_squeezings(spec: &OneModeNsSpec, temperature: f64) -> CriticalSqueezings {
    let (sq, sp) = spec.sigma_coefficients(temperature);
    let l2 = 4.0 * spec.lambda * spec.lambda;
    let r0_plus = 0.5 * (l2 * sq).ln();
    let r0_minus = -0.5 * (l2 * sp).ln();
    CriticalSqueezings {
        r0_plus,
        r0_minus,
        r_c: (r0_plus + r0_minus) / 4.0,
    }
}

/// `ν₋(t)` of the outer pair for `r1 = r3 = r`:
/// `ν₋²/2λ² = 𝒢 − √(𝒢² − 4σ_Pσ_Q)` with `𝒢 = 𝒢₀ + 𝒢₁cos2ωt`.
pub fn one_mode_nu(spec: &OneModeNsSpec, r: f64, temperature: f64, t: f64) -> f64 {
    let (sq, sp) = spec.sigma_coefficients(temperature);
    let g0 = (sq + sp) * (2.0 * r).cosh();
    let g1 = (sq - sp) * (2.0 * r).sinh();
    let g = g0 + g1 * (2.0 * spec.omega * t).cos();
    let root = (g * g - 4.0 * sp * sq).max(0.0).sqrt();
    // g − root = 4σPσQ/(g + root)
    (2.0 * spec.lambda * spec.lambda * 4.0 * sp * sq / (g + root)).sqrt()
}

/// Entanglement of the outer pair at time `t` together with the parameters
/// of `E_N(t) = max{0, E₀ + ΔE(1 + s·cos2ωt)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneModeEntanglement {
    pub e_n: f64,
    pub e0: f64,
    pub delta_e: f64,
    /// `+1` when the maximum falls at `cos 2ωt = 1`, `−1` otherwise.
    pub phase_sign: f64,
}

/// Extremes `(E₀, ΔE, s)` from the critical squeezings.
///
/// At `cos 2ωt = −1` the exponent is `max(r − r₀⁺, r₀⁻ − r)`, at
/// `cos 2ωt = 1` it is `max(−r₀⁺ − r, r₀⁻ + r)`. For `r ≥ 2r_c` this gives
/// `E₀ = r − r₀⁺`, `ΔE = 2r_c`; below, `E₀ = r₀⁻ − r`, `ΔE = r`.
pub fn entanglement_extremes(crit: &CriticalSqueezings, r: f64) -> (f64, f64, f64) {
    let at_minus = (r - crit.r0_plus).max(crit.r0_minus - r);
    let at_plus = (-crit.r0_plus - r).max(crit.r0_minus + r);
    let e0 = at_minus.min(at_plus);
    let delta = 0.5 * (at_plus - at_minus).abs();
    let sign = if at_plus >= at_minus { 1.0 } else { -1.0 };
    (e0, delta, sign)
}

pub fn one_mode_entanglement(
    spec: &OneModeNsSpec,
    r: f64,
    temperature: f64,
    t: f64,
) -> OneModeEntanglement {
    let crit = critical_squeezings(spec, temperature);
    let (e0, delta_e, phase_sign) = entanglement_extremes(&crit, r);
    let e = e0 + delta_e * (1.0 + phase_sign * (2.0 * spec.omega * t).cos());
    OneModeEntanglement {
        e_n: e.max(0.0),
        e0,
        delta_e,
        phase_sign,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Sudden death: no entanglement at late times.
    #[serde(rename = "SD")]
    SuddenDeath,
    /// Periodic sudden death and revival.
    #[serde(rename = "SDR")]
    SuddenDeathRevival,
    /// Entangled at all late times.
    #[serde(rename = "NSD")]
    NoSuddenDeath,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::SuddenDeath => "SD",
            Phase::SuddenDeathRevival => "SDR",
            Phase::NoSuddenDeath => "NSD",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Boundaries go to the less entangled phase.
pub fn phase_classify(e0: f64, delta_e: f64) -> Phase {
    if e0 > 0.0 {
        Phase::NoSuddenDeath
    } else if e0 + 2.0 * delta_e > 0.0 {
        Phase::SuddenDeathRevival
    } else {
        Phase::SuddenDeath
    }
}

/// Closed-form `ν₋(t)` of the outer pair with two protected modes and equal
/// squeezing `r` on all three oscillators.
pub fn two_mode_nu(spec: &TwoModeNsSpec, r: f64, temperature: f64, t: f64) -> Result<f64> {
    let spec = TwoModeNsSpec::new(spec.omega, spec.omega2)?;
    let (w, v) = (spec.omega, spec.omega2);
    let oe = spec.omega_epsilon();
    let (w2, oe2) = (w * w, oe * oe);
    let (sq, sp) = spec.sigma_coefficients(temperature);
    let (jp, jm) = spec.j_pm(r);
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let c1 = (2.0 * w * t).cos();
    let ce = (2.0 * oe * t).cos();
    let cdiff = (2.0 * (oe - w) * t).cos();
    let csum = (2.0 * (oe + w) * t).cos();

    let a0 = 4.0 * ch * (sq + sp) + 2.0 / 3.0 * jp * ch * (w2 + oe2);
    let a1 = 4.0 * sh * c1 * (sq - sp) + 2.0 / 3.0 * jp * sh * c1 * (w2 - oe2)
        + 2.0 / 3.0 * jm * ch * ce * (oe2 - w2)
        - jm * sh / 3.0 * (cdiff * (oe + w).powi(2) + csum * (oe - w).powi(2));
    let b0 = 64.0 * sp * sq
        + 4.0 / 81.0 * (2.0 * w + v) * (w + 2.0 * v) / (w * v)
        + 32.0 / 3.0 * jp * (w2 * sp + oe2 * sq);
    let b1 = 32.0 / 3.0 * jm * ce * (oe2 * sq - w2 * sp);

    let a = a0 + a1;
    let b = b0 + b1;
    let radicand = a * a - b;
    if radicand < -1e-12 * (a * a).max(1.0) {
        return Err(Error::Numerical(format!("negative discriminant {radicand:e}")));
    }
    let root = radicand.max(0.0).sqrt();
    // 2ν² = a − root = b/(a + root)
    Ok((b / (2.0 * (a + root))).sqrt())
}

/// Asymptotic state built directly from the normal modes: damped modes in the
/// Gibbs state, protected modes rotated freely from the initial squeezed
/// vacuum, all correlations with damped modes erased.
#[derive(Debug, Clone)]
pub struct AsymptoticModel {
    pub modes: NormalModes,
    free: Vec<usize>,
    initial: Matrix6<f64>,
    thermal: Matrix6<f64>,
}

impl AsymptoticModel {
    pub fn new(params: &SystemParams, r: [f64; 3], temperature: f64) -> Result<Self> {
        let modes = normal_modes(params)?;
        let free: Vec<usize> = (0..3).filter(|&n| modes.is_free(n)).collect();
        let state = change_basis(&squeezed_vacuum(params.omega_sq, r)?, &modes, Basis::Normal)?;
        let mut thermal = Matrix6::zeros();
        for n in (0..3).filter(|n| !free.contains(n)) {
            let w = modes.omega[n];
            let coth = thermal_factor(w, temperature);
            thermal[(n, n)] = coth / (2.0 * w);
            thermal[(n + 3, n + 3)] = w * coth / 2.0;
        }
        Ok(Self {
            modes,
            free,
            initial: state.cov,
            thermal,
        })
    }

    /// Indices of the protected modes.
    pub fn free_modes(&self) -> &[usize] {
        &self.free
    }

    /// Natural-basis covariance with protected mode `free_modes()[k]` rotated
    /// by the phase `angles[k]` (`Ω t` at time `t`).
    pub fn covariance_at_angles(&self, angles: &[f64]) -> Matrix6<f64> {
        let mut e = Matrix6::zeros();
        for (&n, &theta) in self.free.iter().zip(angles) {
            let w = self.modes.omega[n];
            let (s, c) = theta.sin_cos();
            e[(n, n)] = c;
            e[(n, n + 3)] = s / w;
            e[(n + 3, n)] = -w * s;
            e[(n + 3, n + 3)] = c;
        }
        let normal = e * self.initial * e.transpose() + self.thermal;
        let mut s = Matrix6::zeros();
        s.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.modes.f);
        s.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.modes.f);
        let cov = s * normal * s.transpose();
        (cov + cov.transpose()) * 0.5
    }

    pub fn covariance_at(&self, t: f64) -> Matrix6<f64> {
        let angles: Vec<f64> = self.free.iter().map(|&n| self.modes.omega[n] * t).collect();
        self.covariance_at_angles(&angles)
    }

    pub fn pair_at_angles(&self, i: usize, j: usize, angles: &[f64]) -> Result<PairCovariance> {
        if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::IndexError(i, j));
        }
        let cov = self.covariance_at_angles(angles);
        let idx = [i - 1, i + 2, j - 1, j + 2];
        Ok(PairCovariance {
            m: Matrix4::from_fn(|a, b| cov[(idx[a], idx[b])]),
        })
    }

    /// `ν₋` of pair `(i, j)` at the given protected-mode phases.
    pub fn pair_nu(&self, i: usize, j: usize, angles: &[f64]) -> Result<f64> {
        min_symplectic_eig(&self.pair_at_angles(i, j, angles)?)
    }

    /// Range `[E_min, E_max]` of `−ln ν₋` for pair `(i, j)` over all phases of
    /// the protected modes. Periods are π in each phase because covariances are
    /// quadratic in the rotation.
    pub fn exponent_range(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        let dim = self.free.len();
        let f = |x: &[f64]| -> Result<f64> { Ok(-self.pair_nu(i, j, x)?.ln()) };
        if dim == 0 {
            let e = f(&[])?;
            return Ok((e, e));
        }
        let lo = torus_extremum(&f, dim, false)?;
        let hi = torus_extremum(&f, dim, true)?;
        Ok((lo, hi))
    }
}

/// Global extremum of a π-periodic function on a torus of dimension 1 or 2:
/// grid scan followed by compass refinement of the best few grid points.
fn torus_extremum(f: &dyn Fn(&[f64]) -> Result<f64>, dim: usize, maximize: bool) -> Result<f64> {
    let n: usize = if dim == 1 { 256 } else { 96 };
    let step = std::f64::consts::PI / n as f64;
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
    let total = n.pow(dim as u32);
    for k in 0..total {
        let x: Vec<f64> = (0..dim).map(|d| ((k / n.pow(d as u32)) % n) as f64 * step).collect();
        samples.push((sign * f(&x)?, x));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = samples[0].0;
    for (start_val, start) in samples.into_iter().take(4) {
        let mut x = start;
        let mut val = start_val;
        let mut h = step;
        while h > 1e-12 {
            let mut moved = false;
            for d in 0..dim {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] += dir * h;
                    let v = sign * f(&y)?;
                    if v < val {
                        val = v;
                        x = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        best = best.min(val);
    }
    Ok(sign * best)
}

/// Minimum `E₀` and half-swing `ΔE` of the late-time exponent `−ln ν₋`
/// for any parameter set, from the direct construction.
pub fn asymptotic_extremes(
    params: &SystemParams,
    r: [f64; 3],
    temperature: f64,
    pair: (usize, usize),
) -> Result<(f64, f64)> {
    let model = AsymptoticModel::new(params, r, temperature)?;
    if model.free_modes().is_empty() {
        return Err(Error::NotOnManifold {
            residual: model.modes.min_abs_kappa(),
        });
    }
    let (lo, hi) = model.exponent_range(pair.0, pair.1)?;
    Ok((lo, 0.5 * (hi - lo)))
}

/// Helper for tests and sweeps: `E_N` from a pair covariance.
pub fn pair_log_negativity(v: &PairCovariance) -> Result<f64> {
    Ok(log_negativity(min_symplectic_eig(v)?))
}
