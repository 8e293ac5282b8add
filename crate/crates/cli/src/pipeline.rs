//! Resolves the configured source into density matrices.

use biphoton::{
    apply_dbs, bell_state, build_amplitudes, compute_overlap, dm_from_overlap, werner, Complex64,
    DensityMatrix, OverlapResult,
};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, StateConfig};
use crate::error::CliError;

/// Where the state came from, for the JSON outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    /// `spectral`, `overlap`, `bell` or `werner`.
    pub kind: String,
    pub model: Option<String>,
    pub pump_omega_rad_s: Option<f64>,
    /// Dichroic leakage fraction of the spectral pipeline.
    pub dbs_leakage: Option<f64>,
    pub coincidence_fraction: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PhasedState {
    pub gamma: f64,
    pub dm: DensityMatrix,
    pub overlap: Option<OverlapResult>,
}

/// JSON form of an [`OverlapResult`] with `q` split into parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub p_hv: f64,
    pub p_vh: f64,
    pub q_re: f64,
    pub q_im: f64,
    pub q_abs: f64,
    pub gamma_rad: f64,
}

impl From<&OverlapResult> for OverlapSummary {
    fn from(o: &OverlapResult) -> Self {
        Self {
            p_hv: o.p_hv,
            p_vh: o.p_vh,
            q_re: o.q.re,
            q_im: o.q.im,
            q_abs: o.q.norm(),
            gamma_rad: o.gamma,
        }
    }
}

/// One state per configured phase, in configuration order.
pub fn states(cfg: &PipelineConfig) -> Result<(SourceInfo, Vec<PhasedState>), CliError> {
    let phases = cfg.phase.resolve()?;
    match &cfg.state {
        None => spectral_states(cfg, &phases),
        Some(StateConfig::Overlap {
            p_hv,
            p_vh,
            q_abs,
            q_arg,
        }) => {
            let base = OverlapResult::explicit(*p_hv, *p_vh, Complex64::from_polar(*q_abs, *q_arg));
            let states = phases
                .iter()
                .map(|&g| {
                    let ov = base.with_added_phase(g);
                    Ok(PhasedState {
                        gamma: g,
                        dm: dm_from_overlap(&ov)
                            .map_err(|e| CliError::Config(format!("[state]: {e}")))?,
                        overlap: Some(ov),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok((info("overlap"), states))
        }
        Some(StateConfig::Bell { bell }) => Ok((
            info("bell"),
            vec![PhasedState {
                gamma: 0.0,
                dm: DensityMatrix::from_pure(&bell_state(*bell)),
                overlap: None,
            }],
        )),
        Some(StateConfig::Werner { p, bell }) => Ok((
            info("werner"),
            vec![PhasedState {
                gamma: 0.0,
                dm: werner(*p, *bell).map_err(|e| CliError::Config(format!("[state]: {e}")))?,
                overlap: None,
            }],
        )),
    }
}

fn info(kind: &str) -> SourceInfo {
    SourceInfo {
        kind: kind.into(),
        model: None,
        pump_omega_rad_s: None,
        dbs_leakage: None,
        coincidence_fraction: None,
    }
}

fn spectral_states(
    cfg: &PipelineConfig,
    phases: &[f64],
) -> Result<(SourceInfo, Vec<PhasedState>), CliError> {
    let model = cfg.model.resolve()?;
    let grid = model.covering_grid(
        model.pump_nm,
        model.pump_nm,
        cfg.grid.margin,
        cfg.grid.points,
    )?;
    let amp = build_amplitudes(&model, &grid)?;
    let split = apply_dbs(&amp, &cfg.dbs)?;
    log::info!(
        "dichroic leakage {:.3e} (threshold {})",
        split.leakage,
        split.leakage_threshold
    );
    let mut states = Vec::with_capacity(phases.len());
    let mut fraction = None;
    for &g in phases {
        let ov = compute_overlap(&split, g)?;
        fraction = Some(ov.coincidence_fraction);
        states.push(PhasedState {
            gamma: g,
            dm: dm_from_overlap(&ov)?,
            overlap: Some(ov),
        });
    }
    Ok((
        SourceInfo {
            kind: "spectral".into(),
            model: Some(cfg.model.name()),
            pump_omega_rad_s: Some(biphoton::spectral::nm_to_omega(model.pump_nm)),
            dbs_leakage: Some(split.leakage),
            coincidence_fraction: fraction,
        },
        states,
    ))
}
