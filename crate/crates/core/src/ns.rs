//! Noiseless-subsystem conditions for the three-oscillator chain.
//!
//! A normal mode `v` is protected when `Σ v_i = 0`. Writing its squared
//! frequency as `Ω² = ℛ + (ω1² + ω3²)/2`, eliminating `v2 = -v1 - v3` from the
//! first and third eigen-equations gives a 2×2 system whose determinant fixes
//! the two branches of `ℛ`; the remaining (second) eigen-equation is the
//! constraint that defines the noiseless hypersurface.
//!
//! Closed forms here are advisory: the authoritative test for a protected mode
//! is `|κ_n|` below tolerance after direct diagonalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, normal_modes, SystemParams, NS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Configuration labels: one protected mode (a-d) or two (e-f).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigLabel {
    /// `ω1 = ω3`, `λ12 = λ23`, any `λ13`.
    A,
    /// `ω1 = ω3` with the central frequency tuned to `ω̃2`.
    B,
    /// `λ12 = λ23 = λ̃±`, open chain.
    C,
    /// `λ12 = λ23 = λ̃±`, closed chain.
    D,
    /// Two protected modes, open chain.
    E,
    /// Two protected modes, closed chain.
    F,
    None,
}

impl ConfigLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigLabel::A => "a",
            ConfigLabel::B => "b",
            ConfigLabel::C => "c",
            ConfigLabel::D => "d",
            ConfigLabel::E => "e",
            ConfigLabel::F => "f",
            ConfigLabel::None => "none",
        }
    }
}

impl std::fmt::Display for ConfigLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Δ = (ω1² − ω3²)/2`, `Σ = (ω1² + ω3²)/2 − ω2²` and both branches of `ℛ`
/// (`None` where the square root is undefined).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaQuantities {
    pub delta: f64,
    pub sigma: f64,
    pub r_plus: Option<f64>,
    pub r_minus: Option<f64>,
}

pub fn delta_quantities(params: &SystemParams) -> DeltaQuantities {
    let delta = 0.5 * (params.omega_sq[0] - params.omega_sq[2]);
    let sigma = 0.5 * (params.omega_sq[0] + params.omega_sq[2]) - params.omega_sq[1];
    DeltaQuantities {
        delta,
        sigma,
        r_plus: r_branch(params, Branch::Plus).ok(),
        r_minus: r_branch(params, Branch::Minus).ok(),
    }
}

/// `ℛ = −(λ12+λ23)/2 ± √((Δ + (λ12+λ23)/2 − λ13)² + 2Δ(λ13 − λ12))`.
pub fn r_branch(params: &SystemParams, branch: Branch) -> Result<f64> {
    let (l12, l13, l23) = (params.lambda12, params.lambda13, params.lambda23);
    let delta = 0.5 * (params.omega_sq[0] - params.omega_sq[2]);
    let half = 0.5 * (l12 + l23);
    let radicand = (delta + half - l13).powi(2) + 2.0 * delta * (l13 - l12);
    if radicand < 0.0 {
        return Err(Error::BranchUndefined { radicand });
    }
    Ok(-half + branch.sign() * radicand.sqrt())
}

fn scale(params: &SystemParams) -> f64 {
    params
        .omega_sq
        .iter()
        .chain(params.couplings().iter())
        .fold(1.0f64, |m, x| m.max(x.abs()))
}

fn parameter_tol(params: &SystemParams) -> f64 {
    NS_TOL * scale(params)
}

/// Tolerance on the constraint residual (frequency⁴ units).
pub fn residual_tol(params: &SystemParams) -> f64 {
    NS_TOL * scale(params).powi(2)
}

struct BranchMode {
    omega_sq: f64,
    vector: [f64; 3],
    residual: f64,
}

fn branch_mode(params: &SystemParams, branch: Branch) -> Result<BranchMode> {
    let r = r_branch(params, branch)?;
    let [w1, w2, w3] = params.omega_sq;
    let (l12, l13, l23) = (params.lambda12, params.lambda13, params.lambda23);
    let x = r + 0.5 * (w1 + w3);

    // (v1, v3) spans the kernel of [[w1-x-l12, l13-l12], [l13-l23, w3-x-l23]]
    let from_first = [l12 - l13, w1 - x - l12];
    let from_second = [w3 - x - l23, l23 - l13];
    let n1 = from_first[0].hypot(from_first[1]);
    let n2 = from_second[0].hypot(from_second[1]);
    let [v1, v3] = if n1 >= n2 { from_first } else { from_second };
    let v2 = -v1 - v3;
    let residual = l12 * v1 + (w2 - x) * v2 + l23 * v3;
    Ok(BranchMode {
        omega_sq: x,
        vector: [v1, v2, v3],
        residual,
    })
}

/// Residual of the noiseless constraint on one `ℛ` branch; zero exactly when
/// a zero-coupling normal mode with `Ω² = ℛ + (ω1²+ω3²)/2` exists.
pub fn constraint_residual(params: &SystemParams, branch: Branch) -> Result<f64> {
    build_hamiltonian(params)?;
    Ok(branch_mode(params, branch)?.residual)
}

/// Closed-form protected mode on one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaMode {
    pub omega_delta_sq: f64,
    /// Unnormalized components; multiply by `normalization` for a unit vector.
    pub vector: [f64; 3],
    pub normalization: f64,
}

impl DeltaMode {
    pub fn unit_vector(&self) -> [f64; 3] {
        self.vector.map(|v| v * self.normalization)
    }
}

pub fn delta_mode(params: &SystemParams, branch: Branch) -> Result<DeltaMode> {
    build_hamiltonian(params)?;
    let mode = branch_mode(params, branch)?;
    if mode.residual.abs() > residual_tol(params) {
        return Err(Error::NotOnManifold {
            residual: mode.residual,
        });
    }
    if mode.omega_sq <= 0.0 {
        return Err(Error::NonPhysical(format!(
            "protected mode has Ω² = {} <= 0",
            mode.omega_sq
        )));
    }
    let mut vector = mode.vector;
    let mut norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < parameter_tol(params) {
        // kernel of the reduced system is the whole plane; the
        // antisymmetric combination of the outer oscillators is protected
        vector = [1.0, 0.0, -1.0];
        norm = 2f64.sqrt();
    }
    Ok(DeltaMode {
        omega_delta_sq: mode.omega_sq,
        vector,
        normalization: 1.0 / norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneTarget {
    /// Central frequency `ω̃2²` (requires `ω1 = ω3`).
    Omega2,
    /// Equal couplings `λ̃0` giving two protected modes (requires `ω1 = ω3`).
    Lambda0,
    /// Equal couplings `λ̃±` (both branches).
    LambdaPm,
}

/// A tuned value together with the parameter set it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tuned {
    pub value: f64,
    pub params: SystemParams,
}

fn require_outer_symmetry(params: &SystemParams) -> Result<()> {
    let d = (params.omega_sq[0] - params.omega_sq[2]).abs();
    if d > parameter_tol(params) {
        return Err(Error::SymmetryViolated(format!(
            "requires ω1 = ω3, got ω1² − ω3² = {d:e}"
        )));
    }
    Ok(())
}

fn physical(params: SystemParams) -> Result<SystemParams> {
    match normal_modes(&params) {
        Ok(_) => Ok(params),
        Err(Error::Positivity { min_eigenvalue }) => Err(Error::NonPhysical(format!(
            "tuned system is not positive definite (eigenvalue {min_eigenvalue:e})"
        ))),
        Err(e) => Err(e),
    }
}

fn revalidate_one_mode(tuned: &SystemParams) -> Result<()> {
    let modes = normal_modes(tuned)?;
    if modes.free_count() == 0 {
        return Err(Error::Numerical(format!(
            "tuned parameters leave min |κ| = {:e}",
            modes.min_abs_kappa()
        )));
    }
    Ok(())
}

/// Parameter values placing the chain on a noiseless manifold.
///
/// `Omega2` returns `ω̃2²` with the couplings as given; `Lambda0` and
/// `LambdaPm` overwrite `λ12 = λ23` with the tuned value. Every returned
/// parameter set has been re-checked by diagonalization.
pub fn tuned_parameters(params: &SystemParams, target: TuneTarget) -> Result<Vec<Tuned>> {
    let (l12, l13, l23) = (params.lambda12, params.lambda13, params.lambda23);
    let [w1, w2, w3] = params.omega_sq;
    match target {
        TuneTarget::Omega2 => {
            require_outer_symmetry(params)?;
            let denom = l12 + l23 - 2.0 * l13;
            if denom.abs() < parameter_tol(params) {
                return Err(Error::NonPhysical(
                    "no tuned central frequency when λ12 + λ23 = 2λ13".into(),
                ));
            }
            let w = 0.5 * (w1 + w3);
            let value = w + (2.0 * l13 * (l12 + l23 - l13) - 2.0 * l12 * l23) / denom;
            if value <= 0.0 {
                return Err(Error::NonPhysical(format!("tuned ω̃2² = {value} <= 0")));
            }
            let mut tuned = *params;
            tuned.omega_sq[1] = value;
            let tuned = physical(tuned)?;
            revalidate_one_mode(&tuned)?;
            Ok(vec![Tuned {
                value,
                params: tuned,
            }])
        }
        TuneTarget::Lambda0 => {
            require_outer_symmetry(params)?;
            let value = 0.5 * (w1 + w3) - w2 + l13;
            let mut tuned = *params;
            tuned.lambda12 = value;
            tuned.lambda23 = value;
            let check = two_mode_check(&tuned);
            if check.omega_cm_sq <= 0.0 {
                return Err(Error::NonPhysical(format!(
                    "centre-of-mass frequency Ω_CM² = {} <= 0",
                    check.omega_cm_sq
                )));
            }
            let tuned = physical(tuned)?;
            if !two_mode_check(&tuned).holds {
                return Err(Error::Numerical(
                    "tuned couplings fail the two-mode check".into(),
                ));
            }
            Ok(vec![Tuned {
                value,
                params: tuned,
            }])
        }
        TuneTarget::LambdaPm => {
            let product = (w2 - w1) * (w2 - w3);
            if product < 0.0 {
                return Err(Error::NonPhysical(format!(
                    "(ω2² − ω1²)(ω2² − ω3²) = {product} < 0 has no real λ̃±"
                )));
            }
            let root = product.sqrt();
            let candidates: Vec<f64> = if root == 0.0 {
                vec![l13]
            } else {
                vec![l13 + root, l13 - root]
            };
            let mut out = Vec::new();
            let mut last_err = None;
            for value in candidates {
                let mut tuned = *params;
                tuned.lambda12 = value;
                tuned.lambda23 = value;
                match physical(tuned) {
                    Ok(t) => {
                        revalidate_one_mode(&t)?;
                        out.push(Tuned { value, params: t });
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            match (out.is_empty(), last_err) {
                (true, Some(e)) => Err(e),
                _ => Ok(out),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoModeCheck {
    pub holds: bool,
    /// `ω1² + ω3² − ω2² + 2λ13`, the centre-of-mass frequency squared when
    /// the relations hold.
    pub omega_cm_sq: f64,
}

/// Tests whether the centre of mass `(1,1,1)/√3` is a normal mode, which
/// leaves the other two modes protected.
pub fn two_mode_check(params: &SystemParams) -> TwoModeCheck {
    let [w1, w2, w3] = params.omega_sq;
    let (l12, l13, l23) = (params.lambda12, params.lambda13, params.lambda23);
    let tol = parameter_tol(params);
    let omega_cm_sq = w1 + w3 - w2 + 2.0 * l13;
    let relations = (w1 - (w2 + l23 - l13)).abs() <= tol && (w3 - (w2 + l12 - l13)).abs() <= tol;
    let holds = relations && omega_cm_sq > 0.0 && build_hamiltonian(params).is_ok();
    TwoModeCheck { holds, omega_cm_sq }
}

/// Matches a chain against the symmetric configurations with protected
/// modes. Two-mode labels take precedence. A label is only returned when
/// diagonalization confirms a protected mode.
pub fn classify(params: &SystemParams) -> ConfigLabel {
    let Ok(modes) = normal_modes(params) else {
        return ConfigLabel::None;
    };
    if modes.free_count() == 0 {
        return ConfigLabel::None;
    }
    let tol = parameter_tol(params);
    let open = params.lambda13.abs() <= tol;
    if modes.free_count() >= 2 && two_mode_check(params).holds {
        return if open { ConfigLabel::E } else { ConfigLabel::F };
    }
    let outer = (params.omega_sq[0] - params.omega_sq[2]).abs() <= tol;
    let equal_couplings = (params.lambda12 - params.lambda23).abs() <= tol;
    match (outer, equal_couplings) {
        (true, true) => ConfigLabel::A,
        (true, false) => ConfigLabel::B,
        (false, true) if open => ConfigLabel::C,
        (false, true) => ConfigLabel::D,
        (false, false) => ConfigLabel::None,
    }
}

/// Summary of the noiseless analysis of one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsReport {
    pub kappa: [f64; 3],
    /// Smallest `|residual|` over the defined branches (NaN if neither is).
    pub residual: f64,
    pub residual_plus: Option<f64>,
    pub residual_minus: Option<f64>,
    pub delta_quantities: DeltaQuantities,
    pub ns_mode_count: usize,
    pub config_label: ConfigLabel,
    pub two_mode: TwoModeCheck,
}

pub fn ns_report(params: &SystemParams) -> Result<NsReport> {
    let modes = normal_modes(params)?;
    let residual_plus = constraint_residual(params, Branch::Plus).ok();
    let residual_minus = constraint_residual(params, Branch::Minus).ok();
    let residual = [residual_plus, residual_minus]
        .into_iter()
        .flatten()
        .map(f64::abs)
        .fold(f64::NAN, f64::min);
    Ok(NsReport {
        kappa: modes.kappa,
        residual,
        residual_plus,
        residual_minus,
        delta_quantities: delta_quantities(params),
        ns_mode_count: modes.free_count(),
        config_label: classify(params),
        two_mode: two_mode_check(params),
    })
}
