use biphoton::{
    fit_visibility, simulate_counts, theta_grid, visibility_scan, AnalyzerSetting, Curve,
    NamedBasis, VisibilityFit,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::output::{num, OutputDir};
use crate::pipeline::{states, OverlapSummary, SourceInfo};

#[derive(Debug, Serialize)]
pub struct VisibilityOutput {
    pub source: SourceInfo,
    /// Idler analyzer angle from vertical, rad.
    pub theta_rad: Vec<f64>,
    pub families: Vec<Family>,
}

#[derive(Debug, Serialize)]
pub struct Family {
    pub gamma_rad: f64,
    pub overlap: Option<OverlapSummary>,
    pub curves: Vec<FringeCurve>,
}

#[derive(Debug, Serialize)]
pub struct FringeCurve {
    pub signal: String,
    pub probability: Vec<f64>,
    pub fit: VisibilityFit,
    /// Simulated coincidences, background included, when `[counts]` is set.
    pub counts: Option<Vec<u64>>,
    pub counts_fit: Option<VisibilityFit>,
}

/// Spreads one seed over independent curves.
fn curve_seed(seed: u64, family: usize, curve: usize) -> u64 {
    seed ^ ((family as u64) << 32 | curve as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn simulated(
    cfg: &PipelineConfig,
    dm: &biphoton::DensityMatrix,
    basis: NamedBasis,
    theta: &[f64],
    seed: u64,
) -> Result<Option<(Vec<u64>, VisibilityFit)>, CliError> {
    let Some(c) = &cfg.counts else {
        return Ok(None);
    };
    let settings: Vec<_> = theta
        .iter()
        .map(|&t| {
            (
                AnalyzerSetting::named(basis),
                AnalyzerSetting::linear_from_vertical(t),
            )
        })
        .collect();
    let data = simulate_counts(dm, &settings, &cfg.simulation(c, seed))?;
    let counts: Vec<u64> = data.records.iter().map(|r| r.counts).collect();
    let curve = Curve {
        theta: theta.to_vec(),
        probability: data
            .records
            .iter()
            .map(|r| r.counts as f64 - r.background as f64)
            .collect(),
    };
    Ok(Some((counts, fit_visibility(&curve)?)))
}

/// Fringe curves per phase and signal basis, with their fitted visibilities.
pub fn run(cfg: &PipelineConfig, out: &mut OutputDir) -> Result<VisibilityOutput, CliError> {
    let (source, states) = states(cfg)?;
    let seed = match cfg.counts {
        Some(_) => Some(cfg.require_seed()?),
        None => None,
    };
    let bases = cfg.scan.bases()?;
    let theta = theta_grid(cfg.scan.points, cfg.scan.periods);

    let mut families = Vec::with_capacity(states.len());
    let mut summary_rows = Vec::new();
    for (k, st) in states.iter().enumerate() {
        let mut curves = Vec::with_capacity(bases.len());
        for (b, &basis) in bases.iter().enumerate() {
            let curve = visibility_scan(&st.dm, &AnalyzerSetting::named(basis), &theta)?;
            let fit = fit_visibility(&curve)?;
            let sim = match seed {
                Some(s) => simulated(cfg, &st.dm, basis, &theta, curve_seed(s, k, b))?,
                None => None,
            };
            let (counts, counts_fit) = match sim {
                Some((c, f)) => (Some(c), Some(f)),
                None => (None, None),
            };
            summary_rows.push(vec![
                num(st.gamma.to_degrees()),
                basis.to_string(),
                num(fit.visibility),
                num(fit.phase_resolved),
                fit.sinusoidal.to_string(),
                counts_fit.map(|f| num(f.visibility)).unwrap_or_default(),
            ]);
            curves.push(FringeCurve {
                signal: basis.to_string(),
                probability: curve.probability,
                fit,
                counts,
                counts_fit,
            });
        }

        let mut header = vec!["theta_deg".to_string()];
        for c in &curves {
            header.push(format!("p_{}", c.signal));
            if c.counts.is_some() {
                header.push(format!("counts_{}", c.signal));
            }
        }
        let rows = theta.iter().enumerate().map(|(i, t)| {
            let mut row = vec![num(t.to_degrees())];
            for c in &curves {
                row.push(num(c.probability[i]));
                if let Some(n) = &c.counts {
                    row.push(n[i].to_string());
                }
            }
            row
        });
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv(&format!("visibility/gamma_{k:02}.csv"), &header, rows)?;

        families.push(Family {
            gamma_rad: st.gamma,
            overlap: st.overlap.as_ref().map(OverlapSummary::from),
            curves,
        });
    }
    out.csv(
        "visibility_summary.csv",
        &[
            "gamma_deg",
            "signal",
            "visibility",
            "phase_resolved",
            "sinusoidal",
            "counts_visibility",
        ],
        summary_rows,
    )?;
    let result = VisibilityOutput {
        source,
        theta_rad: theta,
        families,
    };
    out.json("visibility.json", &result)?;
    Ok(result)
}
