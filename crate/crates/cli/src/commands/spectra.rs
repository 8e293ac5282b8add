use biphoton::pump_sweep;
use biphoton::spectral::nm_to_omega;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::output::{num, OutputDir};

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub model: String,
    pub steps: Vec<StepSummary>,
    pub optimum: Optimum,
}

#[derive(Debug, Serialize)]
pub struct StepSummary {
    pub index: usize,
    pub pump_nm: f64,
    pub pump_omega_rad_s: f64,
    pub overlap_2q: f64,
    /// (hv_signal, hv_idler, vh_signal, vh_idler), nm.
    pub phase_matched_nm: [f64; 4],
    pub h_peaks_nm: Vec<f64>,
    pub v_peaks_nm: Vec<f64>,
    pub spectrum_file: String,
}

#[derive(Debug, Serialize)]
pub struct Optimum {
    pub index: usize,
    pub pump_nm: f64,
    pub pump_omega_rad_s: f64,
    pub overlap_2q: f64,
}

#[derive(Debug, Serialize)]
struct MarginalJson {
    pump_omega_rad_s: f64,
    omega_rad_s: Vec<f64>,
    /// Probability density per rad/s.
    h_intensity: Vec<f64>,
    v_intensity: Vec<f64>,
}

/// Marginal spectra per pump wavelength and the `2|q|` sweep summary.
pub fn run(cfg: &PipelineConfig, out: &mut OutputDir) -> Result<SweepSummary, CliError> {
    let sweep = cfg
        .sweep
        .ok_or_else(|| CliError::Config("'spectra' needs a [sweep] table".into()))?;
    let model = cfg.model.resolve()?;
    let grid = model.covering_grid(
        sweep.pump_min_nm,
        sweep.pump_max_nm,
        cfg.grid.margin,
        cfg.grid.points,
    )?;
    let report = pump_sweep(
        &model,
        &grid,
        sweep.pump_min_nm,
        sweep.pump_max_nm,
        sweep.steps,
    )?;

    let mut steps = Vec::with_capacity(report.steps.len());
    for (k, s) in report.steps.iter().enumerate() {
        let stem = format!("spectra/pump_{k:03}");
        let h = s.h_marginal.wavelength_density();
        let v = s.v_marginal.wavelength_density();
        out.csv(
            &format!("{stem}.csv"),
            &["wavelength_nm", "h_density_per_nm", "v_density_per_nm"],
            h.iter()
                .zip(&v)
                .map(|(&(nm, a), &(_, b))| vec![num(nm), num(a), num(b)]),
        )?;
        out.json(
            &format!("{stem}.json"),
            &MarginalJson {
                pump_omega_rad_s: nm_to_omega(s.pump_nm),
                omega_rad_s: s.h_marginal.omega.clone(),
                h_intensity: s.h_marginal.intensity.clone(),
                v_intensity: s.v_marginal.intensity.clone(),
            },
        )?;
        steps.push(StepSummary {
            index: k,
            pump_nm: s.pump_nm,
            pump_omega_rad_s: nm_to_omega(s.pump_nm),
            overlap_2q: s.overlap_2q,
            phase_matched_nm: s.phase_matched_nm,
            h_peaks_nm: s.h_marginal.peaks_nm(0.05),
            v_peaks_nm: s.v_marginal.peaks_nm(0.05),
            spectrum_file: stem,
        });
    }
    let summary = SweepSummary {
        model: cfg.model.name(),
        steps,
        optimum: Optimum {
            index: report.optimum_index,
            pump_nm: report.optimum_pump_nm,
            pump_omega_rad_s: nm_to_omega(report.optimum_pump_nm),
            overlap_2q: report.optimum_overlap_2q,
        },
    };
    out.csv(
        "sweep_summary.csv",
        &["pump_nm", "overlap_2q"],
        summary
            .steps
            .iter()
            .map(|s| vec![num(s.pump_nm), num(s.overlap_2q)]),
    )?;
    out.json("sweep_summary.json", &summary)?;
    log::info!(
        "optimum pump {:.3} nm, 2|q| = {:.4}",
        summary.optimum.pump_nm,
        summary.optimum.overlap_2q
    );
    Ok(summary)
}
