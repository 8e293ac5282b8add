use std::io;

use biphoton::{PolarimetryError, SpectralError, StateError, TomographyError};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const APPROXIMATION_INVALID: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
    #[error("two-arm approximation invalid: {0}")]
    ApproximationInvalid(SpectralError),
    #[error(transparent)]
    Spectral(SpectralError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Polarimetry(#[from] PolarimetryError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    /// Outputs were written, but the reconstruction hit its iteration limit.
    #[error("maximum-likelihood reconstruction did not converge: {0}")]
    NotConverged(String),
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::LeakageThresholdExceeded { .. } => CliError::ApproximationInvalid(e),
            SpectralError::GridTooCoarse { .. } | SpectralError::QuadratureNonConvergent { .. } => {
                CliError::Config(format!("{e}; raise [grid] points"))
            }
            SpectralError::ChannelsOutsideGrid { .. } => {
                CliError::Config(format!("{e}; raise [grid] margin"))
            }
            SpectralError::InvalidModel(_)
            | SpectralError::InvalidGrid(_)
            | SpectralError::InvalidSweep(_)
            | SpectralError::InvalidSplitter(_) => CliError::Config(e.to_string()),
            other => CliError::Spectral(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::ApproximationInvalid(_) => exit::APPROXIMATION_INVALID,
            CliError::NotConverged(_) => exit::NOT_CONVERGED,
            _ => exit::RUNTIME,
        }
    }
}
