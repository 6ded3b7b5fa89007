//! Three coupled harmonic oscillators in a common thermal bath: normal modes,
//! noiseless-subsystem conditions, Gaussian dynamics and correlation measures.

pub mod asymptotics;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod ns;
pub mod symplectic;

pub use error::{Error, Result};
pub use lattice::{normal_modes, BathParams, NormalModes, SystemParams};
