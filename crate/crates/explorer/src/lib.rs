//! Experiment runner on top of `trio-core`: parameter sweeps, time series and
//! tabular output with reproducible run manifests.

pub mod error;
pub mod manifest;
pub mod output;
pub mod spec;
pub mod sweeps;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub use error::{Error, Result};
pub use manifest::RunManifest;
pub use output::{Cell, Report, Table};
pub use spec::{Axis, Format, Observable, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Modes,
    NsCheck,
    Tune,
    Evolve,
    PhaseDiagram,
    DecayMap,
    SyncMap,
    Series,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Modes,
        Command::NsCheck,
        Command::Tune,
        Command::Evolve,
        Command::PhaseDiagram,
        Command::DecayMap,
        Command::SyncMap,
        Command::Series,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::NsCheck => "ns-check",
            Command::Tune => "tune",
            Command::Evolve => "evolve",
            Command::PhaseDiagram => "phase-diagram",
            Command::DecayMap => "decay-map",
            Command::SyncMap => "sync-map",
            Command::Series => "series",
        }
    }

    fn is_grid(self) -> bool {
        matches!(self, Command::PhaseDiagram | Command::DecayMap | Command::SyncMap)
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

/// Validates the configuration and evaluates the command, using `spec.threads`
/// workers when given.
pub fn run(command: Command, spec: &SweepSpec) -> Result<Report> {
    spec.validate()?;
    let job = || match command {
        Command::Modes => sweeps::modes(spec),
        Command::NsCheck => sweeps::ns_check(spec),
        Command::Tune => sweeps::tune(spec),
        Command::Evolve => sweeps::evolve(spec),
        Command::PhaseDiagram => sweeps::phase_diagram(spec),
        Command::DecayMap => sweeps::decay_map(spec),
        Command::SyncMap => sweeps::sync_map(spec),
        Command::Series => sweeps::time_series(spec),
    };
    match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(job),
        None => job(),
    }
}

/// Configuration with command defaults made explicit, as recorded in the
/// manifest.
pub fn resolve(command: Command, spec: &SweepSpec) -> SweepSpec {
    let mut s = spec.clone();
    if command.is_grid() {
        s.axes = sweeps::resolved_axes(command.as_str(), spec);
    }
    if command == Command::Series && s.observables.is_empty() {
        s.observables = sweeps::default_observables();
    }
    s
}

fn overlay_path(output: &Path, name: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = output.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    output.with_file_name(format!("{stem}.{name}.{ext}"))
}

/// Runs a command and writes its output. With an output path the report goes
/// to that file (overlays as sibling CSV files) and a manifest is written
/// alongside; otherwise the encoded report is returned for printing.
pub fn execute(command: Command, spec: &SweepSpec) -> Result<(Vec<u8>, Option<RunManifest>)> {
    let spec = resolve(command, spec);
    let start = Instant::now();
    let report = run(command, &spec)?;
    let elapsed = start.elapsed().as_secs_f64();
    let bytes = report.encode(spec.format)?;
    let Some(out) = spec.output.clone() else {
        return Ok((bytes, None));
    };
    std::fs::write(&out, &bytes).map_err(|e| Error::io(&out, e))?;
    let mut overlays = Vec::new();
    if spec.format == Format::Csv {
        for (name, table) in &report.overlays {
            let path = overlay_path(&out, name);
            std::fs::write(&path, table.encode(Format::Csv)?).map_err(|e| Error::io(&path, e))?;
            overlays.push(path);
        }
    }
    let manifest = RunManifest {
        command: command.as_str().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        grid: RunManifest::grid_dims(if command.is_grid() { &spec.axes } else { &[] }),
        rows: report.table.rows.len(),
        columns: report.table.columns.clone(),
        measured_party: spec.measured,
        threads: spec.threads.unwrap_or_else(rayon::current_num_threads),
        elapsed_seconds: elapsed,
        overlays,
        spec,
    };
    manifest.write(&RunManifest::path_for(&out))?;
    Ok((Vec::new(), Some(manifest)))
}
