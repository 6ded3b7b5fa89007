use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trio_core::correlations::MeasuredParty;
use trio_core::ns::TuneTarget;
use trio_explorer::{execute, Axis, Command, Error, Format, Observable, SweepSpec};

/// Three coupled oscillators in a common bath: noiseless modes, entanglement,
/// discord and synchronization.
///
/// All frequencies, couplings, temperatures and times are in units of the
/// central oscillator frequency ω2 (ħ = k_B = 1).
#[derive(Parser)]
#[command(name = "trio", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Normal modes. Columns: mode, omega, omega_sq, kappa, damping, free, f1, f2, f3
    Modes(Opts),
    /// Noiseless-mode constraint report. Columns: quantity, value
    NsCheck(Opts),
    /// Place the chain on a noiseless manifold. Columns: value, omega1..3,
    /// lambda12, lambda13, lambda23, min_kappa, free_modes, config_label
    Tune(Opts),
    /// Natural-basis covariance on the time grid. Columns: t, then the upper
    /// triangle in the order q1 q2 q3 p1 p2 p3 (q1q1, q1q2, ...)
    Evolve(Opts),
    /// Late-time entanglement phases over (r, T). Columns: axes, e0, delta_e,
    /// phase, r0_plus, r0_minus, two_r_c, half_gap
    PhaseDiagram(Opts),
    /// Decay-rate ratio over (omega1, omega3). Columns: axes, R, weakest_mode,
    /// min_kappa; noiseless curves go to <output>.diagonal.csv and
    /// <output>.hyperbola.csv
    DecayMap(Opts),
    /// Synchronization of <q_i^2> and <q_j^2> over (omega1, omega3). Columns:
    /// axes, t_eval, c_abs, defined
    SyncMap(Opts),
    /// Observables on the time grid. Columns: t, observables, then smoothed
    /// copies (<name>_smooth) with --smooth
    Series(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Party {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Omega2,
    Lambda0,
    LambdaPm,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

/// Every flag overrides the matching field of `--config`.
#[derive(Args)]
struct Opts {
    /// JSON configuration (same schema as the flags) or a run manifest
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis name:min:max:steps[:log]; names omega1..3, lambda,
    /// lambda12, lambda13, lambda23, r, r1..3, T, gamma
    #[arg(long = "axis")]
    axes: Vec<String>,
    /// Bare frequencies ω1,ω2,ω3
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    /// Couplings λ12,λ13,λ23
    #[arg(long, value_delimiter = ',')]
    couplings: Option<Vec<f64>>,
    /// Open chain: λ12 = λ23 = λ, λ13 = 0
    #[arg(long, conflicts_with = "couplings")]
    lambda: Option<f64>,
    /// Bath coupling weights g1,g2,g3
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Bath temperature
    #[arg(short = 'T', long)]
    temperature: Option<f64>,
    /// Bath damping γ
    #[arg(long)]
    gamma: Option<f64>,
    /// Bath cutoff Λ
    #[arg(long)]
    cutoff: Option<f64>,
    /// Initial squeezing r1,r2,r3 (one value applies to all three)
    #[arg(short = 'r', long, value_delimiter = ',')]
    squeezing: Option<Vec<f64>>,
    /// Series observables, e.g. q1,p2,en13,discord12
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    /// Add Gaussian-smoothed columns to the series
    #[arg(long)]
    smooth: bool,
    /// Smoothing kernel width
    #[arg(long)]
    smoothing_width: Option<f64>,
    /// Oscillator pair i,j
    #[arg(long, value_delimiter = ',')]
    pair: Option<Vec<usize>>,
    /// Party measured for discord
    #[arg(long, value_enum)]
    measured: Option<Party>,
    /// Quantity tuned by `tune`
    #[arg(long, value_enum)]
    target: Option<Target>,
    /// End of the time grid
    #[arg(long)]
    t_end: Option<f64>,
    /// Time-grid spacing
    #[arg(long)]
    dt: Option<f64>,
    /// Latest synchronization evaluation time
    #[arg(long)]
    t_max: Option<f64>,
    /// Synchronization window length
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Output file (a manifest is written to <output>.manifest.json)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (does not change results)
    #[arg(long)]
    threads: Option<usize>,
}

fn three(flag: &str, v: &[f64], allow_one: bool) -> Result<[f64; 3], Error> {
    match v {
        [x] if allow_one => Ok([*x; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Config(format!("--{flag} takes three comma-separated values"))),
    }
}

impl Opts {
    fn resolve(&self) -> Result<SweepSpec, Error> {
        let mut s = match &self.config {
            Some(path) => SweepSpec::load(path)?,
            None => SweepSpec::default(),
        };
        if !self.axes.is_empty() {
            s.axes = self.axes.iter().map(|a| a.parse::<Axis>()).collect::<Result<_, _>>()?;
        }
        if let Some(v) = &self.omega {
            s.omega = three("omega", v, false)?;
        }
        if let Some(v) = &self.couplings {
            s.couplings = three("couplings", v, false)?;
        }
        if let Some(l) = self.lambda {
            s.couplings = [l, 0.0, l];
        }
        if let Some(v) = &self.weights {
            s.bath_weights = three("weights", v, false)?;
        }
        if let Some(r) = &self.squeezing {
            s.squeezing = three("squeezing", r, true)?;
        }
        s.bath.temperature = self.temperature.unwrap_or(s.bath.temperature);
        s.bath.gamma = self.gamma.unwrap_or(s.bath.gamma);
        s.bath.cutoff = self.cutoff.unwrap_or(s.bath.cutoff);
        if let Some(obs) = &self.observables {
            s.observables = obs.iter().map(|o| o.parse::<Observable>()).collect::<Result<_, _>>()?;
        }
        s.smooth |= self.smooth;
        s.smoothing_width = self.smoothing_width.unwrap_or(s.smoothing_width);
        if let Some(p) = &self.pair {
            let [i, j] = p.as_slice() else {
                return Err(Error::Config("--pair takes two comma-separated indices".into()));
            };
            s.pair = [*i, *j];
        }
        if let Some(m) = self.measured {
            s.measured = match m {
                Party::A => MeasuredParty::A,
                Party::B => MeasuredParty::B,
            };
        }
        if let Some(t) = self.target {
            s.tune = match t {
                Target::Omega2 => TuneTarget::Omega2,
                Target::Lambda0 => TuneTarget::Lambda0,
                Target::LambdaPm => TuneTarget::LambdaPm,
            };
        }
        s.t_end = self.t_end.unwrap_or(s.t_end);
        s.dt = self.dt.unwrap_or(s.dt);
        s.t_max = self.t_max.unwrap_or(s.t_max);
        s.window = self.window.unwrap_or(s.window);
        if let Some(f) = self.format {
            s.format = match f {
                OutFormat::Csv => Format::Csv,
                OutFormat::Json => Format::Json,
            };
        }
        if self.output.is_some() {
            s.output = self.output.clone();
        }
        if self.threads.is_some() {
            s.threads = self.threads;
        }
        Ok(s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Sub::Modes(o) => (Command::Modes, o),
        Sub::NsCheck(o) => (Command::NsCheck, o),
        Sub::Tune(o) => (Command::Tune, o),
        Sub::Evolve(o) => (Command::Evolve, o),
        Sub::PhaseDiagram(o) => (Command::PhaseDiagram, o),
        Sub::DecayMap(o) => (Command::DecayMap, o),
        Sub::SyncMap(o) => (Command::SyncMap, o),
        Sub::Series(o) => (Command::Series, o),
    };
    let result = opts.resolve().and_then(|spec| execute(command, &spec));
    match result {
        Ok((bytes, manifest)) => {
            if let Some(m) = manifest {
                eprintln!(
                    "[{}] {} rows in {:.3} s",
                    m.command, m.rows, m.elapsed_seconds
                );
            } else if std::io::stdout().write_all(&bytes).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
