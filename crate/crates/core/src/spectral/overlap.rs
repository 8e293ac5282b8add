use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::{require_square, BiphotonAmplitude};
use super::dbs::SplitAmplitude;
use super::grid::SpectralGrid;
use super::quadrature::{coarse_indices, trapezoid_weights};
use super::SpectralError;

/// Largest change of `p_hv`, `p_vh` or `q` allowed between the full grid
/// and its half-resolution sub-grid.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Polarization coefficients of the two-arm state with spectra traced out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub p_hv: f64,
    pub p_vh: f64,
    /// Coherence between `|HV>` and `|VH>`, phase `gamma` included.
    pub q: Complex64,
    /// Phase applied to `q`, rad.
    pub gamma: f64,
    /// Fraction of routed pairs that reach different arms; the coefficients
    /// above are renormalized to this coincidence subspace.
    #[serde(default = "one")]
    pub coincidence_fraction: f64,
}

fn one() -> f64 {
    1.0
}

impl OverlapResult {
    /// Coefficients given directly rather than integrated from spectra.
    pub fn explicit(p_hv: f64, p_vh: f64, q: Complex64) -> Self {
        Self {
            p_hv,
            p_vh,
            q,
            gamma: 0.0,
            coincidence_fraction: 1.0,
        }
    }

    /// Multiplies `q` by `exp(i dgamma)` and records the accumulated phase.
    pub fn with_added_phase(&self, dgamma: f64) -> Self {
        Self {
            q: self.q * Complex64::from_polar(1.0, dgamma),
            gamma: self.gamma + dgamma,
            ..*self
        }
    }

    /// Ideal fringe visibility `2|q|` (for `p_hv = p_vh`).
    pub fn visibility_bound(&self) -> f64 {
        2.0 * self.q.norm()
    }

    pub fn cauchy_schwarz_holds(&self, tol: f64) -> bool {
        self.q.norm() <= (self.p_hv * self.p_vh).max(0.0).sqrt() + tol
    }
}

/// Raw trapezoid integrals `(p_hv, p_vh, q)` over the sub-grid selected by
/// `indices` (used on both axes).
pub(crate) fn integrals_on(
    grid: &SpectralGrid,
    a_hv: &DMatrix<Complex64>,
    a_vh: &DMatrix<Complex64>,
    indices: &[usize],
) -> (f64, f64, Complex64) {
    let axis: Vec<f64> = indices.iter().map(|&k| grid.omega1()[k]).collect();
    let w = trapezoid_weights(&axis);
    let (mut p_hv, mut p_vh, mut q) = (0.0, 0.0, Complex64::new(0.0, 0.0));
    for (b, &j) in indices.iter().enumerate() {
        let (mut col_hv, mut col_vh, mut col_q) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for (a, &i) in indices.iter().enumerate() {
            let hv = a_hv[(i, j)];
            col_hv += w[a] * hv.norm_sqr();
            col_vh += w[a] * a_vh[(i, j)].norm_sqr();
            // A_HV(w1, w2) * conj(A_VH(w2, w1))
            col_q += hv * a_vh[(j, i)].conj() * w[a];
        }
        p_hv += w[b] * col_hv;
        p_vh += w[b] * col_vh;
        q += col_q * w[b];
    }
    (p_hv, p_vh, q)
}

pub(crate) fn converged_integrals(
    grid: &SpectralGrid,
    a_hv: &DMatrix<Complex64>,
    a_vh: &DMatrix<Complex64>,
) -> Result<(f64, f64, Complex64), SpectralError> {
    require_square(grid)?;
    let n = grid.shape().0;
    let full: Vec<usize> = (0..n).collect();
    let fine = integrals_on(grid, a_hv, a_vh, &full);
    let coarse = integrals_on(grid, a_hv, a_vh, &coarse_indices(n));
    let deviation = (fine.0 - coarse.0)
        .abs()
        .max((fine.1 - coarse.1).abs())
        .max((fine.2 - coarse.2).norm());
    if !(deviation <= CONVERGENCE_TOLERANCE) {
        return Err(SpectralError::QuadratureNonConvergent {
            deviation,
            tolerance: CONVERGENCE_TOLERANCE,
        });
    }
    Ok(fine)
}

/// `p_hv`, `p_vh` and `q` of the amplitude as emitted, before any splitter.
/// Nothing is renormalized, so `p_hv + p_vh` measures how well the grid
/// captures the pair probability.
pub fn source_overlap(amp: &BiphotonAmplitude) -> Result<OverlapResult, SpectralError> {
    if !amp.is_normalized() {
        return Err(SpectralError::Unnormalized);
    }
    let (p_hv, p_vh, q) = converged_integrals(amp.grid(), amp.a_hv(), amp.a_vh())?;
    Ok(OverlapResult {
        p_hv,
        p_vh,
        q,
        gamma: 0.0,
        coincidence_fraction: 1.0,
    })
}

/// Integrates `p_hv`, `p_vh` and `q` over the split amplitude, with `q`
/// rotated by `exp(i gamma)`. The coefficients are renormalized to the pairs
/// that reach different arms.
pub fn compute_overlap(split: &SplitAmplitude, gamma: f64) -> Result<OverlapResult, SpectralError> {
    if !split.is_normalized() {
        return Err(SpectralError::Unnormalized);
    }
    split.require_valid()?;
    let (p_hv, p_vh, q) = converged_integrals(split.grid(), split.a_hv(), split.a_vh())?;
    let routed = p_hv + p_vh;
    if !(routed > 0.0 && split.total_weight > 0.0) {
        return Err(SpectralError::LeakageThresholdExceeded {
            leakage: 1.0,
            threshold: split.leakage_threshold,
        });
    }
    let (p_hv, p_vh) = (p_hv / routed, p_vh / routed);
    let mut q = q / routed;
    // The discrete integral is an inner product, so this only trims round-off.
    let bound = (p_hv * p_vh).sqrt();
    if q.norm() > bound {
        q *= bound / q.norm();
    }
    Ok(OverlapResult {
        p_hv,
        p_vh,
        q: q * Complex64::from_polar(1.0, gamma),
        gamma,
        coincidence_fraction: routed / split.total_weight,
    })
}
