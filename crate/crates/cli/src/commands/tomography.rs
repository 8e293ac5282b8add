use biphoton::{
    bell_state, linear_reconstruct, mle_reconstruct, protocol_36, report, simulate_counts,
    state_fidelity, theta_grid, trace_distance, visibility_scan, AnalyzerSetting, DensityMatrix,
    EntanglementReport, LabeledCurve, ReconstructionResult,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::output::{num, OutputDir};
use crate::pipeline::{states, OverlapSummary, SourceInfo};

#[derive(Debug, Serialize)]
pub struct LinearSummary {
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub condition_number: f64,
    pub rank: usize,
    /// Fitted coincidence rate scale, counts/s.
    pub scale: f64,
}

#[derive(Debug, Serialize)]
pub struct TomographyOutput {
    pub source: SourceInfo,
    pub overlap: Option<OverlapSummary>,
    pub seed: u64,
    pub truth: EntanglementReport,
    pub mle: EntanglementReport,
    pub linear: EntanglementReport,
    pub fidelity_mle_to_truth: f64,
    pub trace_distance_mle_to_truth: f64,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: String,
    pub log_likelihood: f64,
}

#[derive(Debug, Serialize)]
struct Matrices<'a> {
    truth: &'a DensityMatrix,
    linear: LinearSummary,
    mle: &'a ReconstructionResult,
}

pub(crate) fn scans(
    cfg: &PipelineConfig,
    dm: &DensityMatrix,
) -> Result<Vec<LabeledCurve>, CliError> {
    let theta = theta_grid(cfg.scan.points, cfg.scan.periods);
    cfg.scan
        .bases()?
        .into_iter()
        .map(|b| {
            Ok(LabeledCurve::new(
                b.to_string(),
                visibility_scan(dm, &AnalyzerSetting::named(b), &theta)?,
            ))
        })
        .collect()
}

fn matrix_rows(dm: &DensityMatrix) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(16);
    for r in 0..4 {
        for c in 0..4 {
            let z = dm.element(r, c);
            rows.push(vec![
                biphoton::state::BASIS_LABELS[r].to_string(),
                biphoton::state::BASIS_LABELS[c].to_string(),
                num(z.re),
                num(z.im),
            ]);
        }
    }
    rows
}

/// Simulates the 36-setting dataset, reconstructs it both ways and reports.
/// Outputs are written before a non-converged reconstruction is signaled.
pub fn run(cfg: &PipelineConfig, out: &mut OutputDir) -> Result<TomographyOutput, CliError> {
    let counts = cfg.require_counts()?;
    let seed = cfg.require_seed()?;
    let (source, states) = states(cfg)?;
    let [state] = states.as_slice() else {
        return Err(CliError::Config(
            "'tomography' takes a single phase; use [phase] gamma rather than a list".into(),
        ));
    };
    let target = bell_state(cfg.tomography.target);

    let data = simulate_counts(&state.dm, &protocol_36(), &cfg.simulation(counts, seed))?;
    out.csv_text("dataset.csv", &data.to_csv())?;
    out.json("dataset.json", &data)?;

    let linear = linear_reconstruct(&data)?;
    let mle = mle_reconstruct(&data, &cfg.tomography.mle)?;
    let linear_state = linear.projected();

    let truth_report = report(&state.dm, &target, &scans(cfg, &state.dm)?)?;
    let mle_report = report(&mle.dm, &target, &scans(cfg, &mle.dm)?)?;
    let linear_report = report(&linear_state, &target, &scans(cfg, &linear_state)?)?;

    out.json(
        "density_matrices.json",
        &Matrices {
            truth: &state.dm,
            linear: LinearSummary {
                matrix: linear.rows(),
                physical: linear.is_positive(),
                min_eigenvalue: linear.min_eigenvalue,
                condition_number: linear.condition_number,
                rank: linear.rank,
                scale: linear.scale,
            },
            mle: &mle,
        },
    )?;
    let header = ["row", "col", "re", "im"];
    out.csv("rho_truth.csv", &header, matrix_rows(&state.dm))?;
    out.csv("rho_linear.csv", &header, matrix_rows(&linear_state))?;
    out.csv("rho_mle.csv", &header, matrix_rows(&mle.dm))?;

    let result = TomographyOutput {
        source,
        overlap: state.overlap.as_ref().map(OverlapSummary::from),
        seed,
        fidelity_mle_to_truth: state_fidelity(&mle.dm, &state.dm),
        trace_distance_mle_to_truth: trace_distance(&mle.dm, &state.dm),
        truth: truth_report,
        mle: mle_report,
        linear: linear_report,
        converged: mle.converged,
        iterations: mle.iterations,
        stop_reason: mle.diagnostics.stop_reason.clone(),
        log_likelihood: mle.log_likelihood,
    };
    out.json("tomography_report.json", &result)?;
    out.csv(
        "tomography_report.csv",
        &["estimate", "concurrence", "fidelity_to_target", "purity"],
        [
            ("truth", &result.truth),
            ("linear", &result.linear),
            ("mle", &result.mle),
        ]
        .into_iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                num(r.concurrence),
                num(r.fidelity_to_target),
                num(r.purity),
            ]
        }),
    )?;
    if !result.converged {
        return Err(CliError::NotConverged(format!(
            "{} after {} iterations",
            result.stop_reason, result.iterations
        )));
    }
    Ok(result)
}
