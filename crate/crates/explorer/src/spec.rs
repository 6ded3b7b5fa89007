//! Sweep configuration: the JSON schema accepted by `--config` and the
//! target of every command-line flag.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use trio_core::correlations::MeasuredParty;
use trio_core::lattice::{BathParams, SystemParams};
use trio_core::ns::TuneTarget;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Parameters an axis can sweep.
pub const AXIS_NAMES: &[&str] = &[
    "omega1", "omega2", "omega3", "lambda", "lambda12", "lambda13", "lambda23", "r", "r1", "r2",
    "r3", "T", "gamma",
];

/// One sweep axis, written `name:min:max:steps[:log]` on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn linear(name: &str, min: f64, max: f64, steps: usize) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
            steps,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !AXIS_NAMES.contains(&self.name.as_str()) {
            return Err(Error::Config(format!(
                "unknown axis '{}' (expected one of {})",
                self.name,
                AXIS_NAMES.join(", ")
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config(format!("axis '{}' needs at least 2 steps", self.name)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "axis '{}' has invalid range [{}, {}]",
                self.name, self.min, self.max
            )));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::Config(format!("log axis '{}' must start above 0", self.name)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let s = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => self.min * (self.max / self.min).powf(s),
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::Config(format!("axis '{s}' is not name:min:max:steps[:log]")));
        }
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("axis '{s}': '{x}' is not a number")))
        };
        let steps = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("axis '{s}': '{}' is not a step count", parts[3])))?;
        let scale = match parts.get(4) {
            None | Some(&"lin") | Some(&"linear") => Scale::Linear,
            Some(&"log") => Scale::Log,
            Some(other) => return Err(Error::Config(format!("axis '{s}': unknown scale '{other}'"))),
        };
        let axis = Axis {
            name: parts[0].to_string(),
            min: num(parts[1])?,
            max: num(parts[2])?,
            steps,
            scale,
        };
        axis.validate()?;
        Ok(axis)
    }
}

/// Quantities the `series` command can tabulate. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    /// `⟨q_i²⟩`
    Q(usize),
    /// `⟨p_i²⟩`
    P(usize),
    /// Log-negativity of pair `(i, j)`.
    Negativity(usize, usize),
    /// Gaussian discord of pair `(i, j)`.
    Discord(usize, usize),
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Q(i) => write!(f, "q{i}"),
            Observable::P(i) => write!(f, "p{i}"),
            Observable::Negativity(i, j) => write!(f, "en{i}{j}"),
            Observable::Discord(i, j) => write!(f, "discord{i}{j}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown observable '{s}' (use q1, p2, en13, discord12, ...)"));
        let index = |c: char| c.to_digit(10).map(|d| d as usize).filter(|d| (1..=3).contains(d));
        let pair = |rest: &str| -> Result<(usize, usize)> {
            let cs: Vec<char> = rest.chars().collect();
            match cs.as_slice() {
                [a, b] => match (index(*a), index(*b)) {
                    (Some(i), Some(j)) if i != j => Ok((i, j)),
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            }
        };
        if let Some(rest) = s.strip_prefix("discord") {
            let (i, j) = pair(rest)?;
            return Ok(Observable::Discord(i, j));
        }
        if let Some(rest) = s.strip_prefix("en") {
            let (i, j) = pair(rest)?;
            return Ok(Observable::Negativity(i, j));
        }
        let cs: Vec<char> = s.chars().collect();
        match cs.as_slice() {
            ['q', c] => index(*c).map(Observable::Q).ok_or_else(bad),
            ['p', c] => index(*c).map(Observable::P).ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSpec {
    pub temperature: f64,
    pub gamma: f64,
    pub cutoff: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        Self {
            temperature: 10.0,
            gamma: 0.07,
            cutoff: 50.0,
        }
    }
}

/// Full run configuration. Frequencies, couplings and times are in units of
/// the central oscillator frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Empty means the command's default axes.
    pub axes: Vec<Axis>,
    /// Bare frequencies `(ω1, ω2, ω3)`.
    pub omega: [f64; 3],
    /// Couplings `(λ12, λ13, λ23)`.
    pub couplings: [f64; 3],
    pub bath_weights: [f64; 3],
    pub bath: BathSpec,
    /// Initial squeezing `(r1, r2, r3)`.
    pub squeezing: [f64; 3],
    pub observables: Vec<Observable>,
    /// Smoothed copies of every observable column in `series`.
    pub smooth: bool,
    pub smoothing_width: f64,
    pub pair: [usize; 2],
    pub measured: MeasuredParty,
    pub tune: TuneTarget,
    /// Time grid `[0, t_end]` with spacing `dt` for `series` and `evolve`.
    pub t_end: f64,
    pub dt: f64,
    /// Latest evaluation time of `sync-map`.
    pub t_max: f64,
    /// Synchronization window length.
    pub window: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses all cores. Never changes the output.
    pub threads: Option<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axes: Vec::new(),
            omega: [1.3, 1.0, 1.3],
            couplings: [0.4, 0.0, 0.4],
            bath_weights: [1.0; 3],
            bath: BathSpec::default(),
            squeezing: [2.0, 2.5, 3.0],
            observables: Vec::new(),
            smooth: false,
            smoothing_width: 5.0,
            pair: [1, 3],
            measured: MeasuredParty::B,
            tune: TuneTarget::Omega2,
            t_end: 200.0,
            dt: 0.02,
            t_max: 5000.0,
            window: 15.0,
            format: Format::Csv,
            output: None,
            threads: None,
        }
    }
}

impl SweepSpec {
    /// Parses a JSON configuration. A run manifest is accepted too, in which
    /// case its resolved configuration is used.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let value = match value.get("spec") {
            Some(inner) if value.get("command").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.axes {
            a.validate()?;
        }
        for (k, a) in self.axes.iter().enumerate() {
            if self.axes[..k].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("axis '{}' given twice", a.name)));
            }
        }
        let [i, j] = self.pair;
        if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::Config(format!("invalid pair ({i}, {j})")));
        }
        let positive = [
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("window", self.window),
            ("smoothing_width", self.smoothing_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> SystemParams {
        SystemParams::from_frequencies(self.omega, self.couplings).with_weights(self.bath_weights)
    }

    pub fn bath_params(&self) -> Result<BathParams> {
        Ok(BathParams::new(self.bath.temperature, self.bath.gamma, self.bath.cutoff)?)
    }

    /// Sets one axis parameter on a copy of the configuration.
    pub fn with_axis_value(&self, name: &str, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match name {
            "omega1" => s.omega[0] = value,
            "omega2" => s.omega[1] = value,
            "omega3" => s.omega[2] = value,
            "lambda" => {
                s.couplings[0] = value;
                s.couplings[2] = value;
            }
            "lambda12" => s.couplings[0] = value,
            "lambda13" => s.couplings[1] = value,
            "lambda23" => s.couplings[2] = value,
            "r" => s.squeezing = [value; 3],
            "r1" => s.squeezing[0] = value,
            "r2" => s.squeezing[1] = value,
            "r3" => s.squeezing[2] = value,
            "T" => s.bath.temperature = value,
            "gamma" => s.bath.gamma = value,
            _ => return Err(Error::Config(format!("unknown axis '{name}'"))),
        }
        Ok(s)
    }

    /// Uniform time grid `0, dt, …` up to `t_end`.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = (self.t_end / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.dt).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_round_trip() {
        let a: Axis = "omega1:1:2:5".parse().unwrap();
        assert_eq!(a.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let b: Axis = "T:1:100:3:log".parse().unwrap();
        let v = b.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        assert!("omega1:2:1:5".parse::<Axis>().is_err());
        assert!("omega1:1:2:1".parse::<Axis>().is_err());
        assert!("mass:1:2:4".parse::<Axis>().is_err());
        assert!("T:0:2:4:log".parse::<Axis>().is_err());
    }

    #[test]
    fn observables_parse() {
        for s in ["q1", "p3", "en13", "discord12"] {
            assert_eq!(s.parse::<Observable>().unwrap().to_string(), s);
        }
        for s in ["q4", "en11", "discord1", "x1"] {
            assert!(s.parse::<Observable>().is_err());
        }
    }

    #[test]
    fn json_round_trip_and_manifest() {
        let mut s = SweepSpec::default();
        s.axes.push(Axis::linear("r", 0.0, 1.0, 3));
        s.observables = vec![Observable::Q(1), Observable::Discord(1, 2)];
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(SweepSpec::from_json(&text).unwrap(), s);
        let wrapped = format!("{{\"command\": \"series\", \"spec\": {text}}}");
        assert_eq!(SweepSpec::from_json(&wrapped).unwrap(), s);
        assert!(SweepSpec::from_json("{\"omgea\": [1, 1, 1]}").is_err());
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let s = SweepSpec::from_json("{\"bath\": {\"temperature\": 2}}").unwrap();
        assert_eq!(s.bath.temperature, 2.0);
        assert_eq!(s.bath.gamma, 0.07);
        assert_eq!(s.omega, [1.3, 1.0, 1.3]);
    }

    #[test]
    fn time_grid_includes_end() {
        let s = SweepSpec {
            t_end: 1.0,
            dt: 0.1,
            ..Default::default()
        };
        let g = s.time_grid();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
    }
}
