//! Two-party Gaussian correlations and time-series diagnostics.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Basis, GaussianState};
use crate::error::{Error, Result};
use crate::symplectic;

/// Covariance of an oscillator pair in the `(q_A, p_A, q_B, p_B)` ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCovariance {
    pub m: Matrix4<f64>,
}

impl PairCovariance {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(Error::NonPhysical("pair covariance is not symmetric".into()));
        }
        Ok(Self {
            m: (m + m.transpose()) * 0.5,
        })
    }

    pub fn from_blocks(alpha: Matrix2<f64>, beta: Matrix2<f64>, gamma: Matrix2<f64>) -> Result<Self> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&alpha);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&beta);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&gamma);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&gamma.transpose());
        Self::new(m)
    }

    pub fn alpha(&self) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn beta(&self) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn gamma(&self) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Exchanges the roles of the two parties.
    pub fn swapped(&self) -> Self {
        Self::from_blocks(self.beta(), self.alpha(), self.gamma().transpose()).unwrap()
    }

    /// Two symplectic eigenvalues from direct diagonalization (1/2 = vacuum).
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        let d = DMatrix::from_iterator(4, 4, self.m.iter().copied());
        let nu = symplectic::symplectic_eigenvalues(&d, &symplectic::form_interleaved(2))?;
        Ok([nu[0], nu[1]])
    }

    /// Covariance of the partially transposed state (`p_B → −p_B`).
    pub fn partial_transpose(&self) -> Self {
        let p = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
        Self { m: p * self.m * p }
    }
}

/// Restricts a natural-basis state to oscillators `i` and `j` (1-based).
pub fn reduce_pair(state: &GaussianState, i: usize, j: usize) -> Result<PairCovariance> {
    if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::IndexError(i, j));
    }
    if state.basis != Basis::Natural {
        return Err(Error::BasisMismatch {
            expected: Basis::Natural.as_str(),
            found: state.basis.as_str(),
        });
    }
    let idx = [i - 1, i + 2, j - 1, j + 2];
    let m = Matrix4::from_fn(|a, b| state.cov[(idx[a], idx[b])]);
    Ok(PairCovariance { m })
}

/// Smallest symplectic eigenvalue of the partial transpose in vacuum-normalized
/// units (`ν₋ = 1` for the vacuum), from the block determinants.
pub fn min_symplectic_eig(v: &PairCovariance) -> Result<f64> {
    let a = 4.0 * v.alpha().determinant();
    let b = 4.0 * v.beta().determinant();
    let g = 4.0 * v.gamma().determinant();
    let s = 16.0 * v.m.determinant();
    let x = a + b - 2.0 * g;
    let radicand = x * x - 4.0 * s;
    if radicand < -1e-12 * (x * x).max(1.0) {
        return Err(Error::Numerical(format!(
            "negative discriminant {radicand:e} in symplectic spectrum"
        )));
    }
    let root = radicand.max(0.0).sqrt();
    // ν₋²ν₊² = s avoids cancellation in (x − root)/2
    let denom = x + root;
    if !(denom > 0.0) || s < 0.0 {
        return Err(Error::Numerical("covariance is not positive definite".into()));
    }
    Ok((2.0 * s / denom).sqrt())
}

/// `E_N = max(0, −ln ν₋)`.
pub fn log_negativity(nu_minus: f64) -> f64 {
    (-nu_minus.ln()).max(0.0)
}

/// Party on which the Gaussian measurement is performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeasuredParty {
    A,
    #[default]
    B,
}

fn entropy_fn(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let up = (x + 1.0) / 2.0;
    let down = (x - 1.0) / 2.0;
    up * up.ln() - if down > 0.0 { down * down.ln() } else { 0.0 }
}

/// Optimal conditional determinant of party A after a Gaussian measurement
/// on B, in vacuum-normalized units.
pub(crate) fn conditional_det(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if b - 1.0 < 1e-12 {
        // a pure B is uncorrelated with A
        return a;
    }
    let lhs = (d - a * b).powi(2);
    let rhs = (1.0 + b) * c * c * (a + d);
    if lhs <= rhs {
        let inner = (c * c + (b - 1.0) * (d - a)).max(0.0);
        (2.0 * c * c + (b - 1.0) * (d - a) + 2.0 * c.abs() * inner.sqrt()) / (b - 1.0).powi(2)
    } else {
        let inner = (c.powi(4) + (d - a * b).powi(2) - 2.0 * c * c * (a * b + d)).max(0.0);
        (a * b - c * c + d - inner.sqrt()) / (2.0 * b)
    }
}

/// Gaussian discord with a Gaussian measurement on `measured`.
pub fn gaussian_discord(v: &PairCovariance, measured: MeasuredParty) -> Result<f64> {
    let v = match measured {
        MeasuredParty::B => *v,
        MeasuredParty::A => v.swapped(),
    };
    let a = (v.alpha() * 2.0).determinant();
    let b = (v.beta() * 2.0).determinant();
    let c = (v.gamma() * 2.0).determinant();
    let d = (v.m * 2.0).determinant();
    // direct diagonalization stays accurate when ν₊ ≈ ν₋
    let [lo, hi] = v.symplectic_eigenvalues()?;
    let (nu_minus, nu_plus) = (2.0 * lo, 2.0 * hi);
    let slack = 1e-9 * nu_plus.max(1.0);
    if nu_minus < 1.0 - slack || a < 1.0 - slack || b < 1.0 - slack {
        return Err(Error::Numerical(format!(
            "pair covariance violates the uncertainty relation (ν₋ = {nu_minus})"
        )));
    }
    let e_min = conditional_det(a, b, c, d);
    let value = entropy_fn(b.sqrt()) - entropy_fn(nu_plus) - entropy_fn(nu_minus)
        + entropy_fn(e_min.max(1.0).sqrt());
    if value < -1e-9 {
        return Err(Error::Numerical(format!("negative discord {value:e}")));
    }
    Ok(value.max(0.0))
}

/// Local symplectic reduction to `diag(a, a) ⊕ diag(b, b)` with diagonal
/// correlations `diag(c₊, c₋)`, `c₊ ≥ |c₋|`, `c₊ ≥ 0`.
pub fn standard_form(v: &PairCovariance) -> Result<PairCovariance> {
    let normalize = |block: Matrix2<f64>| -> Result<(f64, Matrix2<f64>)> {
        let det = block.determinant();
        if !(det > 0.0) {
            return Err(Error::Numerical("local block is not positive definite".into()));
        }
        let a = det.sqrt();
        // (block/a)^{-1/2} is symplectic and maps block to a·I
        let eig = (block / a).symmetric_eigen();
        let inv_root = eig.eigenvectors
            * Matrix2::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
            * eig.eigenvectors.transpose();
        Ok((a, inv_root))
    };
    let (a, sa) = normalize(v.alpha())?;
    let (b, sb) = normalize(v.beta())?;
    let g = sa * v.gamma() * sb.transpose();
    let svd = g.svd(true, true);
    let mut u = svd.u.unwrap();
    let mut vt = svd.v_t.unwrap();
    let mut s = svd.singular_values;
    if u.determinant() < 0.0 {
        u.set_column(1, &(-u.column(1)));
        s[1] = -s[1];
    }
    if vt.determinant() < 0.0 {
        vt.set_row(1, &(-vt.row(1)));
        s[1] = -s[1];
    }
    PairCovariance::from_blocks(
        Matrix2::identity() * a,
        Matrix2::identity() * b,
        Matrix2::new(s[0], 0.0, 0.0, s[1]),
    )
}

/// Samples of a real function of time on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "series has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("series times must increase strictly".into()));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("series contains non-finite entries".into()));
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return Some(self.values[0]);
        }
        if k >= n {
            return Some(self.values[n - 1]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[k - 1] * (1.0 - w) + self.values[k] * w)
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = 0.5 * (times[k] - times[k - 1]);
        w[k - 1] += h;
        w[k] += h;
    }
    w
}

/// Minimum number of samples inside a synchronization window.
pub const MIN_WINDOW_SAMPLES: usize = 32;

/// Windowed correlation coefficient of two series over `[t, t + Δt]`:
/// `∫δh δg / √(∫δh² ∫δg²)` with `δx = x − ⟨x⟩` and trapezoidal quadrature.
/// `g` is interpolated onto the sample times of `h`.
pub fn sync_indicator(h: &TimeSeries, g: &TimeSeries, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !t.is_finite() {
        return Err(Error::Window(format!("window [{t}, {t} + {dt}] is empty")));
    }
    let end = t + dt;
    let eps = 1e-9 * dt;
    for s in [h, g] {
        if s.is_empty() || s.times[0] > t + eps || s.times[s.len() - 1] < end - eps {
            return Err(Error::Window(format!(
                "series does not cover the window [{t}, {end}]"
            )));
        }
    }
    let lo = h.times.partition_point(|&x| x < t - eps);
    let hi = h.times.partition_point(|&x| x <= end + eps);
    let times = &h.times[lo..hi];
    if times.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::Window(format!(
            "{} samples in window, need at least {MIN_WINDOW_SAMPLES}",
            times.len()
        )));
    }
    let hv = &h.values[lo..hi];
    let gv: Vec<f64> = times
        .iter()
        .map(|&x| g.interpolate(x.clamp(g.times[0], g.times[g.len() - 1])).unwrap())
        .collect();
    let w = trapezoid_weights(times);
    let span: f64 = w.iter().sum();
    let mean = |v: &[f64]| v.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / span;
    let (mh, mg) = (mean(hv), mean(&gv));
    let (mut shh, mut sgg, mut shg) = (0.0, 0.0, 0.0);
    for k in 0..times.len() {
        let (a, b) = (hv[k] - mh, gv[k] - mg);
        shh += w[k] * a * a;
        sgg += w[k] * b * b;
        shg += w[k] * a * b;
    }
    for var in [shh / span, sgg / span] {
        if var < 1e-15 {
            return Err(Error::Degenerate { variance: var });
        }
    }
    Ok((shg / (shh * sgg).sqrt()).clamp(-1.0, 1.0))
}

/// Convolution with a normalized Gaussian of standard deviation `width`,
/// mirrored at both ends and truncated at six widths.
pub fn gaussian_smooth(series: &TimeSeries, width: f64) -> Result<TimeSeries> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing width must be > 0, got {width}"
        )));
    }
    let n = series.len();
    if n < 2 {
        return Ok(series.clone());
    }
    let t = &series.times;
    let y = &series.values;
    let w = trapezoid_weights(t);
    let (t0, t1) = (t[0], t[n - 1]);
    let reach = 6.0 * width;
    let inv = 1.0 / (2.0 * width * width);
    let values = t
        .par_iter()
        .map(|&tk| {
            let (mut num, mut den) = (0.0, 0.0);
            let mut add = |lo: f64, hi: f64, image: &dyn Fn(f64) -> f64| {
                let a = t.partition_point(|&x| x < lo);
                let b = t.partition_point(|&x| x <= hi);
                for j in a..b {
                    let d = tk - image(t[j]);
                    let kern = w[j] * (-d * d * inv).exp();
                    num += kern * y[j];
                    den += kern;
                }
            };
            add(tk - reach, tk + reach, &|x| x);
            // mirror images about the left and right ends
            if tk - reach < t0 {
                add(t0, 2.0 * t0 - (tk - reach), &|x| 2.0 * t0 - x);
            }
            if tk + reach > t1 {
                add(2.0 * t1 - (tk + reach), t1, &|x| 2.0 * t1 - x);
            }
            if den > 0.0 {
                num / den
            } else {
                y[t.partition_point(|&x| x < tk).min(n - 1)]
            }
        })
        .collect();
    Ok(TimeSeries {
        times: t.clone(),
        values,
    })
}

/// A local maximum of the power spectrum at angular frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub power: f64,
}

/// Peaks of the Hann-windowed power spectrum of the mean-subtracted series,
/// scanned on `n_freq` angular frequencies in `[omega_min, omega_max]` and
/// sorted by decreasing power. Peak positions are refined by parabolic
/// interpolation.
pub fn spectral_peaks(
    series: &TimeSeries,
    omega_min: f64,
    omega_max: f64,
    n_freq: usize,
) -> Result<Vec<SpectralPeak>> {
    if !(omega_max > omega_min) || n_freq < 3 || series.len() < 2 {
        return Err(Error::InvalidParameter("invalid spectral scan".into()));
    }
    let t = &series.times;
    let w = trapezoid_weights(t);
    let (t0, span) = (t[0], t[t.len() - 1] - t[0]);
    let mean = series.values.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / span;
    let weighted: Vec<f64> = t
        .iter()
        .zip(&series.values)
        .zip(&w)
        .map(|((&tk, y), wk)| {
            let hann = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * (tk - t0) / span).cos());
            (y - mean) * hann * wk
        })
        .collect();
    let step = (omega_max - omega_min) / (n_freq - 1) as f64;
    let power: Vec<f64> = (0..n_freq)
        .into_par_iter()
        .map(|k| {
            let om = omega_min + step * k as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (tk, x) in t.iter().zip(&weighted) {
                let (s, c) = (om * (tk - t0)).sin_cos();
                re += x * c;
                im -= x * s;
            }
            re * re + im * im
        })
        .collect();
    let mut peaks = Vec::new();
    for k in 1..n_freq - 1 {
        if power[k] > power[k - 1] && power[k] >= power[k + 1] {
            let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
            let curv = a - 2.0 * b + c;
            let shift = if curv < 0.0 { 0.5 * (a - c) / curv } else { 0.0 };
            peaks.push(SpectralPeak {
                omega: omega_min + step * (k as f64 + shift),
                power: b - 0.25 * (a - c) * shift,
            });
        }
    }
    peaks.sort_by(|x, y| y.power.total_cmp(&x.power));
    Ok(peaks)
}
