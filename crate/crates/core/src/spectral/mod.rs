//! Two-channel biphoton spectral model.
//!
//! Amplitudes are sampled on a [`SpectralGrid`] whose first axis carries the
//! H-polarized photon frequency `omega1` and whose second axis carries the
//! V-polarized photon frequency `omega2`. `a_hv` holds pairs in which the H
//! photon is the shorter-wavelength one, `a_vh` pairs in which the V photon
//! is.

mod amplitude;
mod dbs;
mod grid;
mod model;
mod overlap;
pub mod quadrature;
mod sweep;

pub use amplitude::{
    build_amplitudes, marginal_spectrum, BiphotonAmplitude, Polarization, Spectrum,
};
pub use dbs::{apply_dbs, DichroicSplitter, EdgeModel, SplitAmplitude};
pub use grid::{
    nm_to_omega, omega_to_nm, omega_width_to_nm, wavelength_width_to_omega, SpectralGrid,
    MIN_AXIS_POINTS, SPEED_OF_LIGHT,
};
pub use model::{ChannelSpec, Envelope, Loci, PhaseMatchModel};
pub use overlap::{compute_overlap, source_overlap, OverlapResult, CONVERGENCE_TOLERANCE};
pub use sweep::{pump_sweep, SweepReport, SweepStep};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too coarse: {feature} rms width {width:.3e} rad/s spans fewer than {required} grid steps of {step:.3e} rad/s")]
    GridTooCoarse {
        feature: String,
        width: f64,
        step: f64,
        required: f64,
    },
    #[error("channel {channel} extends outside the grid ({detail})")]
    ChannelsOutsideGrid { channel: String, detail: String },
    #[error("amplitude is not normalized")]
    Unnormalized,
    #[error("dichroic leakage {leakage:.4} exceeds threshold {threshold:.4}: the two-arm labeling does not hold")]
    LeakageThresholdExceeded { leakage: f64, threshold: f64 },
    #[error("quadrature did not converge: half-resolution check deviates by {deviation:.3e} (> {tolerance:.1e})")]
    QuadratureNonConvergent { deviation: f64, tolerance: f64 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("invalid dichroic splitter: {0}")]
    InvalidSplitter(String),
}
