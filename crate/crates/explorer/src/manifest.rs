//! Side-car record of a run, sufficient to regenerate its output: pass the
//! manifest back through `--config` with the same subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trio_core::correlations::MeasuredParty;

use crate::error::{Error, Result};
use crate::spec::{Axis, SweepSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Resolved configuration, with the command's default axes filled in.
    pub spec: SweepSpec,
    /// Steps per axis; empty for commands without a grid.
    pub grid: Vec<usize>,
    pub rows: usize,
    pub columns: Vec<String>,
    pub measured_party: MeasuredParty,
    pub threads: usize,
    pub elapsed_seconds: f64,
    /// Extra files written next to the main output.
    pub overlays: Vec<PathBuf>,
}

impl RunManifest {
    pub fn grid_dims(axes: &[Axis]) -> Vec<usize> {
        axes.iter().map(|a| a.steps).collect()
    }

    /// `out.csv` → `out.csv.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}
