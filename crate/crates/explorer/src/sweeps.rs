//! The experiments behind each subcommand. Every grid is evaluated cell by
//! cell on the rayon pool and assembled in row-major order, so the result
//! never depends on the number of workers.

use rayon::prelude::*;
use trio_core::asymptotics::{
    asymptotic_extremes, critical_squeezings, entanglement_extremes, phase_classify,
    CriticalSqueezings, OneModeNsSpec,
};
use trio_core::correlations::{
    gaussian_discord, gaussian_smooth, log_negativity, min_symplectic_eig, reduce_pair,
    sync_indicator, TimeSeries,
};
use trio_core::dynamics::{
    change_basis, mme_coefficients, propagate, squeezed_vacuum, Basis, GaussianState,
    MmeCoefficients,
};
use trio_core::lattice::{normal_modes, NormalModes, SystemParams};
use trio_core::ns::{classify, ns_report, tuned_parameters};

use crate::error::{Error, Result};
use crate::output::{Cell, Report, Table};
use crate::spec::{Axis, Observable, SweepSpec};

/// Expands the axes into cells, first axis slowest.
pub fn grid(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut cells = vec![Vec::new()];
    for axis in axes {
        let values = axis.values();
        cells = cells
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    cells
}

fn cell_spec(spec: &SweepSpec, axes: &[Axis], values: &[f64]) -> Result<SweepSpec> {
    let mut s = spec.clone();
    for (a, &v) in axes.iter().zip(values) {
        s = s.with_axis_value(&a.name, v)?;
    }
    Ok(s)
}

fn axes_or(spec: &SweepSpec, default: &[Axis]) -> Vec<Axis> {
    if spec.axes.is_empty() {
        default.to_vec()
    } else {
        spec.axes.clone()
    }
}

fn axis_columns(axes: &[Axis]) -> Vec<String> {
    axes.iter().map(|a| a.name.clone()).collect()
}

pub fn default_grid_steps() -> usize {
    200
}

/// Axes actually used by a grid command (defaults filled in).
pub fn resolved_axes(command: &str, spec: &SweepSpec) -> Vec<Axis> {
    let n = default_grid_steps();
    match command {
        "phase-diagram" => axes_or(spec, &[Axis::linear("r", 0.0, 1.5, n), Axis::linear("T", 0.0, 2.0, n)]),
        "decay-map" | "sync-map" => axes_or(
            spec,
            &[Axis::linear("omega1", 1.0, 2.0, n), Axis::linear("omega3", 1.0, 2.0, n)],
        ),
        _ => spec.axes.clone(),
    }
}

/// Normal-mode table: frequencies, effective couplings, damping rates and
/// mode vectors.
pub fn modes(spec: &SweepSpec) -> Result<Report> {
    let p = spec.params();
    let m = normal_modes(&p)?;
    let mut t = Table::new(&["mode", "omega", "omega_sq", "kappa", "damping", "free", "f1", "f2", "f3"]);
    for n in 0..3 {
        let v = m.mode_vector(n);
        t.push(vec![
            (n + 1).into(),
            m.omega[n].into(),
            m.omega_sq[n].into(),
            m.kappa[n].into(),
            (spec.bath.gamma * m.kappa[n] * m.kappa[n]).into(),
            m.is_free(n).into(),
            v[0].into(),
            v[1].into(),
            v[2].into(),
        ]);
    }
    Ok(t.into())
}

/// Key/value summary of the noiseless analysis.
pub fn ns_check(spec: &SweepSpec) -> Result<Report> {
    let p = spec.params();
    let r = ns_report(&p)?;
    let modes = normal_modes(&p)?;
    let mut t = Table::new(&["quantity", "value"]);
    let mut kv = |k: &str, v: Cell| t.push(vec![k.into(), v]);
    for n in 0..3 {
        kv(&format!("kappa{}", n + 1), r.kappa[n].into());
    }
    kv("residual", Cell::Num(r.residual));
    kv("residual_plus", Cell::opt(r.residual_plus));
    kv("residual_minus", Cell::opt(r.residual_minus));
    kv("delta", r.delta_quantities.delta.into());
    kv("sigma", r.delta_quantities.sigma.into());
    kv("r_plus", Cell::opt(r.delta_quantities.r_plus));
    kv("r_minus", Cell::opt(r.delta_quantities.r_minus));
    kv("ns_mode_count", r.ns_mode_count.into());
    kv("config_label", r.config_label.as_str().into());
    kv("two_mode", r.two_mode.holds.into());
    kv("omega_cm_sq", r.two_mode.omega_cm_sq.into());
    kv("decay_ratio", modes.decay_ratio().into());
    Ok(t.into())
}

/// Tuned parameter sets for the selected target.
pub fn tune(spec: &SweepSpec) -> Result<Report> {
    let p = spec.params();
    let mut t = Table::new(&[
        "value", "omega1", "omega2", "omega3", "lambda12", "lambda13", "lambda23", "min_kappa", "free_modes",
        "config_label",
    ]);
    for tuned in tuned_parameters(&p, spec.tune)? {
        let q = tuned.params;
        let m = normal_modes(&q)?;
        let w = q.frequencies();
        t.push(vec![
            tuned.value.into(),
            w[0].into(),
            w[1].into(),
            w[2].into(),
            q.lambda12.into(),
            q.lambda13.into(),
            q.lambda23.into(),
            m.min_abs_kappa().into(),
            m.free_count().into(),
            classify(&q).as_str().into(),
        ]);
    }
    Ok(t.into())
}

struct Setup {
    modes: NormalModes,
    coeffs: MmeCoefficients,
    initial: GaussianState,
}

fn setup(spec: &SweepSpec) -> Result<Setup> {
    let p = spec.params();
    let modes = normal_modes(&p)?;
    let coeffs = mme_coefficients(&modes, &spec.bath_params()?)?;
    let initial = change_basis(&squeezed_vacuum(p.omega_sq, spec.squeezing)?, &modes, Basis::Normal)?;
    Ok(Setup {
        modes,
        coeffs,
        initial,
    })
}

fn natural_at(s: &Setup, t: f64) -> Result<GaussianState> {
    Ok(change_basis(&propagate(&s.initial, &s.coeffs, t)?, &s.modes, Basis::Natural)?)
}

const QUADRATURES: [&str; 6] = ["q1", "q2", "q3", "p1", "p2", "p3"];

/// Natural-basis covariance (upper triangle) on the time grid.
pub fn evolve(spec: &SweepSpec) -> Result<Report> {
    let s = setup(spec)?;
    let mut cols = vec!["t".to_string()];
    for i in 0..6 {
        for j in i..6 {
            cols.push(format!("{}{}", QUADRATURES[i], QUADRATURES[j]));
        }
    }
    let rows: Vec<Vec<Cell>> = spec
        .time_grid()
        .par_iter()
        .map(|&t| {
            let st = natural_at(&s, t)?;
            let mut row = vec![Cell::Num(t)];
            for i in 0..6 {
                for j in i..6 {
                    row.push(st.cov[(i, j)].into());
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table { columns: cols, rows }.into())
}

fn observe(obs: Observable, st: &GaussianState, spec: &SweepSpec) -> Result<f64> {
    Ok(match obs {
        Observable::Q(i) => st.cov[(i - 1, i - 1)],
        Observable::P(i) => st.cov[(i + 2, i + 2)],
        Observable::Negativity(i, j) => log_negativity(min_symplectic_eig(&reduce_pair(st, i, j)?)?),
        Observable::Discord(i, j) => gaussian_discord(&reduce_pair(st, i, j)?, spec.measured)?,
    })
}

pub fn default_observables() -> Vec<Observable> {
    vec![Observable::Q(1), Observable::Q(2), Observable::Q(3)]
}

/// Observables on the time grid, with smoothed copies when requested.
pub fn time_series(spec: &SweepSpec) -> Result<Report> {
    let s = setup(spec)?;
    let obs = if spec.observables.is_empty() {
        default_observables()
    } else {
        spec.observables.clone()
    };
    let times = spec.time_grid();
    let samples: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let st = natural_at(&s, t)?;
            obs.iter().map(|&o| observe(o, &st, spec)).collect()
        })
        .collect::<Result<_>>()?;
    let mut columns = vec!["t".to_string()];
    columns.extend(obs.iter().map(|o| o.to_string()));
    let mut smoothed = Vec::new();
    if spec.smooth {
        for (k, o) in obs.iter().enumerate() {
            let series = TimeSeries::new(times.clone(), samples.iter().map(|r| r[k]).collect())?;
            smoothed.push(gaussian_smooth(&series, spec.smoothing_width)?.values);
            columns.push(format!("{o}_smooth"));
        }
    }
    let rows = times
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let mut row = vec![Cell::Num(t)];
            row.extend(samples[n].iter().map(|&v| Cell::Num(v)));
            row.extend(smoothed.iter().map(|c| Cell::Num(c[n])));
            row
        })
        .collect();
    Ok(Table { columns, rows }.into())
}

/// Closed-form critical squeezings when the cell is the symmetric open chain
/// measured on the outer pair with `r1 = r3`.
fn one_mode_closed_form(s: &SweepSpec, p: &SystemParams, free: usize) -> Option<(OneModeNsSpec, CriticalSqueezings)> {
    let tol = 1e-12 * p.omega_sq.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let symmetric = free == 1
        && (p.omega_sq[0] - p.omega_sq[2]).abs() <= tol
        && (p.lambda12 - p.lambda23).abs() <= tol
        && p.lambda13.abs() <= tol
        && s.squeezing[0] == s.squeezing[2];
    let pair = [s.pair[0].min(s.pair[1]), s.pair[0].max(s.pair[1])];
    if !symmetric || pair != [1, 3] {
        return None;
    }
    let w = p.frequencies();
    let one = OneModeNsSpec::new(w[0], w[1], p.lambda12).ok()?;
    let crit = critical_squeezings(&one, s.bath.temperature);
    Some((one, crit))
}

/// Minimum late-time entanglement `E₀`, its half-swing `ΔE` and the phase on
/// each cell. The symmetric one-mode chain on the outer pair uses the closed
/// form and reports the critical-squeezing overlays; other noiseless
/// configurations are evaluated from the asymptotic covariance directly.
pub fn phase_diagram(spec: &SweepSpec) -> Result<Report> {
    let axes = resolved_axes("phase-diagram", spec);
    let mut columns = axis_columns(&axes);
    for c in ["e0", "delta_e", "phase", "r0_plus", "r0_minus", "two_r_c", "half_gap"] {
        columns.push(c.into());
    }
    let rows: Vec<Vec<Cell>> = grid(&axes)
        .par_iter()
        .map(|values| {
            let s = cell_spec(spec, &axes, values)?;
            s.bath_params()?;
            let p = s.params();
            let report = ns_report(&p)?;
            if report.ns_mode_count == 0 {
                let modes = normal_modes(&p)?;
                return Err(Error::Core(trio_core::Error::NotOnManifold {
                    residual: if report.residual.is_nan() { modes.min_abs_kappa() } else { report.residual },
                }));
            }
            let r = s.squeezing[0];
            let (e0, de, crit) = match one_mode_closed_form(&s, &p, report.ns_mode_count) {
                Some((_, crit)) => {
                    let (e0, de, _) = entanglement_extremes(&crit, r);
                    (e0, de, Some(crit))
                }
                None => {
                    let (e0, de) = asymptotic_extremes(&p, s.squeezing, s.bath.temperature, (s.pair[0], s.pair[1]))?;
                    (e0, de, None)
                }
            };
            let mut row: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
            row.push(e0.into());
            row.push(de.into());
            row.push(phase_classify(e0, de).as_str().into());
            row.push(Cell::opt(crit.map(|c| c.r0_plus)));
            row.push(Cell::opt(crit.map(|c| c.r0_minus)));
            row.push(Cell::opt(crit.map(|c| 2.0 * c.r_c)));
            row.push(Cell::opt(crit.map(|c| 0.5 * (c.r0_plus - c.r0_minus))));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table { columns, rows }.into())
}

fn require_open_chain(p: &SystemParams) -> Result<()> {
    let tol = 1e-12 * p.lambda12.abs().max(1.0);
    if (p.lambda12 - p.lambda23).abs() > tol || p.lambda13.abs() > tol {
        return Err(Error::Core(trio_core::Error::SymmetryViolated(format!(
            "decay and synchronization maps need λ12 = λ23 and λ13 = 0, got ({}, {}, {})",
            p.lambda12, p.lambda13, p.lambda23
        ))));
    }
    Ok(())
}

/// `ω3` on the open-chain hyperbola `(ω1² − ω2²)(ω3² − ω2²) = λ²`.
pub fn hyperbola_omega3(omega1: f64, omega2: f64, lambda: f64) -> Option<f64> {
    let d = omega1 * omega1 - omega2 * omega2;
    if d == 0.0 {
        return None;
    }
    let w3 = omega2 * omega2 + lambda * lambda / d;
    (w3 > 0.0).then(|| w3.sqrt())
}

/// Decay-rate ratio `R` of the two weakest modes over the axes. Cells where
/// the chain is not positive definite are left empty. When the axes are
/// `(omega1, omega3)` the noiseless curves are returned as overlays.
pub fn decay_map(spec: &SweepSpec) -> Result<Report> {
    let axes = resolved_axes("decay-map", spec);
    let mut columns = axis_columns(&axes);
    for c in ["R", "weakest_mode", "min_kappa"] {
        columns.push(c.into());
    }
    let rows: Vec<Vec<Cell>> = grid(&axes)
        .par_iter()
        .map(|values| {
            let s = cell_spec(spec, &axes, values)?;
            let p = s.params();
            require_open_chain(&p)?;
            let mut row: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
            match normal_modes(&p) {
                Ok(m) => {
                    row.push(m.decay_ratio().into());
                    row.push((m.weakest_mode() + 1).into());
                    row.push(m.min_abs_kappa().into());
                }
                Err(trio_core::Error::Positivity { .. }) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
                Err(e) => return Err(e.into()),
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut report = Report::from(Table { columns, rows });
    if let [a, b] = axes.as_slice() {
        if a.name == "omega1" && b.name == "omega3" {
            report.overlays = manifold_overlays(spec, a, b);
        }
    }
    Ok(report)
}

fn manifold_overlays(spec: &SweepSpec, a: &Axis, b: &Axis) -> Vec<(String, Table)> {
    let mut diagonal = Table::new(&["omega1", "omega3"]);
    let mut hyperbola = Table::new(&["omega1", "omega3"]);
    for w1 in a.values() {
        if (b.min..=b.max).contains(&w1) {
            diagonal.push(vec![w1.into(), w1.into()]);
        }
        if let Some(w3) = hyperbola_omega3(w1, spec.omega[1], spec.couplings[0]) {
            if (b.min..=b.max).contains(&w3) {
                hyperbola.push(vec![w1.into(), w3.into()]);
            }
        }
    }
    vec![("diagonal".into(), diagonal), ("hyperbola".into(), hyperbola)]
}

/// Evaluation time `min{t_MAX, 1/Γ₀}` with `Γ₀` the smallest damping rate
/// (zero when a mode is protected).
pub fn sync_time(coeffs: &MmeCoefficients, t_max: f64) -> f64 {
    let g0 = coeffs.gamma.iter().copied().fold(f64::INFINITY, f64::min);
    if g0 > 0.0 {
        t_max.min(1.0 / g0)
    } else {
        t_max
    }
}

/// `|C|` of `⟨q_i²⟩` against `⟨q_j²⟩` over `[t, t + Δt]` on each cell.
/// Cells where `C` is undefined are flagged and left empty.
pub fn sync_map(spec: &SweepSpec) -> Result<Report> {
    let axes = resolved_axes("sync-map", spec);
    let mut columns = axis_columns(&axes);
    for c in ["t_eval", "c_abs", "defined"] {
        columns.push(c.into());
    }
    let [i, j] = spec.pair;
    let rows: Vec<Vec<Cell>> = grid(&axes)
        .par_iter()
        .map(|values| {
            let s = cell_spec(spec, &axes, values)?;
            require_open_chain(&s.params())?;
            let st = setup(&s)?;
            let t0 = sync_time(&st.coeffs, s.t_max);
            let c = window_correlation(&st, t0, s.window, s.dt, i, j)?;
            let mut row: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
            row.push(t0.into());
            row.push(Cell::opt(c.map(f64::abs)));
            row.push(c.is_some().into());
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table { columns, rows }.into())
}

/// Samples `⟨q_i²⟩` and `⟨q_j²⟩` over the window and returns their
/// synchronization indicator, or `None` when it is undefined.
fn window_correlation(s: &Setup, t0: f64, window: f64, dt: f64, i: usize, j: usize) -> Result<Option<f64>> {
    let n = (window / dt).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|k| t0 + window * k as f64 / n as f64).collect();
    let mut h = Vec::with_capacity(times.len());
    let mut g = Vec::with_capacity(times.len());
    for &t in &times {
        let st = natural_at(s, t)?;
        h.push(st.cov[(i - 1, i - 1)]);
        g.push(st.cov[(j - 1, j - 1)]);
    }
    let h = TimeSeries::new(times.clone(), h)?;
    let g = TimeSeries::new(times, g)?;
    match sync_indicator(&h, &g, t0, window) {
        Ok(c) => Ok(Some(c)),
        Err(trio_core::Error::Degenerate { .. }) | Err(trio_core::Error::Window(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Synchronization indicator of `⟨q_i²⟩` and `⟨q_j²⟩` for the configured
/// parameters over `[t, t + window]`.
pub fn sync_at(spec: &SweepSpec, t: f64) -> Result<Option<f64>> {
    let s = setup(spec)?;
    window_correlation(&s, t, spec.window, spec.dt, spec.pair[0], spec.pair[1])
}
