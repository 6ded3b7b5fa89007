use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hamiltonian matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    Positivity { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint branch undefined: negative radicand {radicand:e}")]
    BranchUndefined { radicand: f64 },

    #[error("parameters are off the noiseless manifold (residual {residual:e})")]
    NotOnManifold { residual: f64 },

    #[error("non-physical configuration: {0}")]
    NonPhysical(String),

    #[error("required symmetry violated: {0}")]
    SymmetryViolated(String),

    #[error("state is in the {found} basis, expected {expected}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("normal mode {mode} has frequency {omega} >= bath cutoff {cutoff}")]
    CutoffViolation { mode: usize, omega: f64, cutoff: f64 },

    #[error("invalid oscillator pair ({0}, {1}): indices must be distinct and in 1..=3")]
    IndexError(usize, usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("averaging window invalid: {0}")]
    Window(String),

    #[error("series is degenerate over the window (variance {variance:e})")]
    Degenerate { variance: f64 },

    #[error("outside validity regime: {0}")]
    Regime(String),
}

impl Error {
    /// True for errors caused by inputs outside the model's domain, as opposed
    /// to failures of a numerical routine on valid inputs.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Degenerate { .. })
    }
}
