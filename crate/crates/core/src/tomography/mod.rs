//! Two-qubit state reconstruction from coincidence counts.

mod likelihood;
mod linear;
mod mle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarimetry::PolarimetryError;
use crate::state::DensityMatrix;

pub use likelihood::{log_likelihood, log_likelihood_with};
pub use linear::{linear_from_rates, linear_reconstruct, LinearReconstruction};
pub use mle::mle_reconstruct;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error("setting set has rank {rank} of 16; it is not informationally complete")]
    RankDeficient { rank: usize },
    #[error("dataset carries no signal counts")]
    DegenerateDataset,
    #[error("predicted mean is zero for setting {index} but counts were observed")]
    ZeroPredictedMean { index: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Dataset(#[from] PolarimetryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// Linear inversion projected onto the nearest density matrix.
    #[default]
    FromLinear,
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundHandling {
    /// Recorded background counts are added to each predicted mean.
    #[default]
    Offset,
    /// Background counts are subtracted from the data first, floored at zero.
    Subtract,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MleOptions {
    pub max_iter: usize,
    /// Stop when an accepted step gains less log-likelihood than this.
    pub tolerance: f64,
    pub gradient_tolerance: f64,
    pub init: Initialization,
    pub background: BackgroundHandling,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            init: Initialization::FromLinear,
            background: BackgroundHandling::Offset,
        }
    }
}

impl MleOptions {
    pub fn validate(&self) -> Result<(), TomographyError> {
        if self.max_iter < 1 {
            return Err(TomographyError::InvalidOptions(
                "max_iter must be >= 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) || !(self.gradient_tolerance > 0.0) {
            return Err(TomographyError::InvalidOptions(
                "tolerances must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub gradient_norm: f64,
    /// Fitted detected pair rate, pairs/s.
    pub intensity: f64,
    /// Smallest eigenvalue of the returned state before any clamping.
    pub min_eigenvalue: f64,
    pub linear_condition_number: Option<f64>,
    pub linear_min_eigenvalue: Option<f64>,
    pub stop_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub dm: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics,
    /// Log-likelihood of the start and of every accepted iterate.
    pub likelihood_trace: Vec<f64>,
}
