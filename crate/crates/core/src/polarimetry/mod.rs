//! Wave-plate analyzers, coincidence probabilities, fringe scans and
//! Poissonian count simulation.
//!
//! Wave-plate fast axes and polarizer axes are measured from horizontal.
//! Fringe scans label the idler analyzer by its angle from vertical.

mod counts;
mod jones;
mod scan;
mod tilt;

use thiserror::Error;

pub use counts::{
    expected_counts, noiseless_dataset, protocol_36, simulate_counts, CountSimulation,
    TomographyDataset, TomographyRecord,
};
pub use jones::{
    analyzer_projector, half_wave, linear_state, quarter_wave, retarder, AnalyzerSetting,
    NamedBasis, Projector,
};
pub use scan::{
    coincidence_probability, compensated_scan, theta_grid, visibility_scan, Curve,
    MIN_POINTS_PER_PERIOD,
};
pub use tilt::{tilt_to_gamma, TiltPlate};

pub(crate) use scan::check_theta_grid as scan_check;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarimetryError {
    #[error("invalid analyzer setting: {0}")]
    InvalidSetting(String),
    #[error("analyzer angles do not select basis {basis} (deviation {deviation:.3e})")]
    BasisMismatch { basis: NamedBasis, deviation: f64 },
    #[error("scan covers {span:.4} rad; at least one period (pi) is required")]
    ScanTooShort { span: f64 },
    #[error("scan has {points_per_period:.2} points per period; at least 8 are required")]
    ScanTooSparse { points_per_period: f64 },
    #[error("invalid plate: {0}")]
    InvalidPlate(String),
    #[error("plate tilt {0} rad outside (-pi/3, pi/3)")]
    TiltOutOfRange(f64),
    #[error("invalid count simulation: {0}")]
    InvalidRates(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}
