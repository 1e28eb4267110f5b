use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("Mittag-Leffler evaluation failed for alpha={alpha}, beta={beta}, z={z}")]
    MittagLeffler { alpha: f64, beta: f64, z: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("mesh with {n_elems} element(s) has no interior degrees of freedom")]
    NoInteriorDofs { n_elems: usize },

    #[error("assembly produced a non-finite value in element {element}")]
    Assembly { element: usize },

    #[error("eigen solve failed: {0}")]
    Eigen(String),

    #[error("time step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },

    #[error(
        "Picard iteration did not converge after {iterations} iterations (gamma_T = {gamma_t}); ratios: {ratios:?}"
    )]
    PicardNonConvergence {
        iterations: usize,
        gamma_t: f64,
        ratios: Vec<f64>,
    },

    #[error("asymptotic probe failed at eps={eps}: {reason}")]
    Probe { eps: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
