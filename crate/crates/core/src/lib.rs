//! Polarization-entangled photon pairs from a type-II waveguide source.
//!
//! The crate is organized along the measurement chain:
//!
//! * [`spectral`] builds two-channel biphoton amplitudes on a frequency grid,
//!   routes them through a dichroic splitter and integrates the overlap
//!   coefficients `p_hv`, `p_vh` and `q`.
//! * [`state`] turns those coefficients into a two-qubit density matrix.
//! * [`polarimetry`] models wave-plate analyzers, coincidence probabilities,
//!   fringe scans and Poissonian count simulation.
//! * [`tomography`] reconstructs the density matrix from counts by linear
//!   inversion and maximum likelihood.
//! * [`metrics`] scores a state: concurrence, fidelity, purity, visibility.
//!
//! Frequencies are angular (rad/s) internally and wavelengths (nm) at the
//! edges. The two-qubit basis order is always `HH, HV, VH, VV` with the
//! signal photon first.

pub mod metrics;
pub mod polarimetry;
pub mod spectral;
pub mod state;
pub mod tomography;

mod linalg;

pub use num_complex::Complex64;

pub use metrics::{
    concurrence, fidelity, fit_visibility, purity, report, state_fidelity, trace_distance,
    visibility, CurveVisibility, EntanglementReport, LabeledCurve, VisibilityFit,
};
pub use polarimetry::{
    analyzer_projector, coincidence_probability, compensated_scan, expected_counts,
    noiseless_dataset, protocol_36, simulate_counts, theta_grid, tilt_to_gamma, visibility_scan,
    AnalyzerSetting, CountSimulation, Curve, NamedBasis, PolarimetryError, Projector, TiltPlate,
    TomographyDataset, TomographyRecord,
};
pub use spectral::{
    apply_dbs, build_amplitudes, compute_overlap, marginal_spectrum, pump_sweep, source_overlap,
    BiphotonAmplitude, ChannelSpec, DichroicSplitter, EdgeModel, Envelope, OverlapResult,
    PhaseMatchModel, Polarization, SpectralError, SpectralGrid, Spectrum, SplitAmplitude,
    SweepReport,
};
pub use state::{
    add_background, bell_state, dm_from_overlap, werner, BellKind, DensityMatrix, PureState,
    StateError,
};
pub use tomography::{
    linear_from_rates, linear_reconstruct, log_likelihood, log_likelihood_with, mle_reconstruct,
    BackgroundHandling, Diagnostics, Initialization, LinearReconstruction, MleOptions,
    ReconstructionResult, TomographyError,
};
