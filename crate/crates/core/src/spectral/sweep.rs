use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::{build_amplitudes, marginal_spectrum, Polarization, Spectrum};
use super::grid::SpectralGrid;
use super::model::PhaseMatchModel;
use super::overlap::converged_integrals;
use super::SpectralError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepStep {
    pub pump_nm: f64,
    pub h_marginal: Spectrum,
    pub v_marginal: Spectrum,
    /// `2|q|` of the unsplit amplitude at this pump wavelength.
    pub overlap_2q: f64,
    /// Phase-matched (hv_signal, hv_idler, vh_signal, vh_idler), nm.
    pub phase_matched_nm: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub steps: Vec<SweepStep>,
    pub optimum_index: usize,
    pub optimum_pump_nm: f64,
    pub optimum_overlap_2q: f64,
}

impl SweepReport {
    pub fn overlaps(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.overlap_2q).collect()
    }

    pub fn pumps_nm(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.pump_nm).collect()
    }
}

/// Evenly spaced pump wavelengths from `pump_min_nm` to `pump_max_nm`
/// inclusive. Steps are evaluated in parallel; the report keeps their order.
pub fn pump_sweep(
    model: &PhaseMatchModel,
    grid: &SpectralGrid,
    pump_min_nm: f64,
    pump_max_nm: f64,
    steps: usize,
) -> Result<SweepReport, SpectralError> {
    if steps < 2 {
        return Err(SpectralError::InvalidSweep(format!(
            "{steps} step(s); a sweep needs at least 2"
        )));
    }
    if !(pump_min_nm.is_finite() && pump_max_nm.is_finite() && pump_min_nm < pump_max_nm) {
        return Err(SpectralError::InvalidSweep(format!(
            "pump range [{pump_min_nm}, {pump_max_nm}] nm is empty"
        )));
    }
    let dl = (pump_max_nm - pump_min_nm) / (steps - 1) as f64;
    let pumps: Vec<f64> = (0..steps)
        .map(|k| {
            if k == steps - 1 {
                pump_max_nm
            } else {
                pump_min_nm + dl * k as f64
            }
        })
        .collect();

    let results: Result<Vec<SweepStep>, SpectralError> = pumps
        .par_iter()
        .map(|&pump_nm| {
            let m = model.with_pump(pump_nm);
            let amp = build_amplitudes(&m, grid)?;
            let (p_hv, p_vh, q) = converged_integrals(grid, amp.a_hv(), amp.a_vh())?;
            Ok(SweepStep {
                pump_nm,
                h_marginal: marginal_spectrum(&amp, Polarization::H)?,
                v_marginal: marginal_spectrum(&amp, Polarization::V)?,
                overlap_2q: 2.0 * q.norm() / (p_hv + p_vh),
                phase_matched_nm: model.phase_matched_wavelengths(pump_nm),
            })
        })
        .collect();
    let steps = results?;

    let mut optimum_index = 0;
    for (k, s) in steps.iter().enumerate() {
        if s.overlap_2q > steps[optimum_index].overlap_2q {
            optimum_index = k;
        }
    }
    Ok(SweepReport {
        optimum_pump_nm: steps[optimum_index].pump_nm,
        optimum_overlap_2q: steps[optimum_index].overlap_2q,
        optimum_index,
        steps,
    })
}
