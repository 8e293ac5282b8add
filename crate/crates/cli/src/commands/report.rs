use std::fmt::Write as _;

use biphoton::{bell_state, report, EntanglementReport};
use serde::Serialize;

use super::tomography::scans;
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::output::{num, OutputDir};
use crate::pipeline::{states, OverlapSummary, SourceInfo};

#[derive(Debug, Serialize)]
pub struct ReportOutput {
    pub source: SourceInfo,
    pub entries: Vec<ReportEntry>,
}

#[derive(Debug, Serialize)]
pub struct ReportEntry {
    pub gamma_rad: f64,
    pub overlap: Option<OverlapSummary>,
    pub report: EntanglementReport,
}

/// Entanglement metrics of the configured state at every configured phase.
pub fn run(cfg: &PipelineConfig, out: &mut OutputDir) -> Result<ReportOutput, CliError> {
    let (source, states) = states(cfg)?;
    let target = bell_state(cfg.tomography.target);
    let entries = states
        .iter()
        .map(|st| {
            Ok(ReportEntry {
                gamma_rad: st.gamma,
                overlap: st.overlap.as_ref().map(OverlapSummary::from),
                report: report(&st.dm, &target, &scans(cfg, &st.dm)?)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let result = ReportOutput { source, entries };

    let labels: Vec<String> = cfg.scan.signal_bases.clone();
    let mut header = vec![
        "gamma_deg".to_string(),
        "concurrence".into(),
        "fidelity_to_target".into(),
        "purity".into(),
    ];
    header.extend(labels.iter().map(|l| format!("visibility_{l}")));
    let rows = result.entries.iter().map(|e| {
        let mut row = vec![
            num(e.gamma_rad.to_degrees()),
            num(e.report.concurrence),
            num(e.report.fidelity_to_target),
            num(e.report.purity),
        ];
        row.extend(e.report.visibilities.iter().map(|v| num(v.visibility)));
        row
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("report.csv", &header, rows)?;
    out.json("report.json", &result)?;
    Ok(result)
}

/// Plain-text table for the terminal.
pub fn table(r: &ReportOutput) -> String {
    let mut s = String::new();
    let Some(first) = r.entries.first() else {
        return s;
    };
    let _ = write!(
        s,
        "{:>10} {:>12} {:>12} {:>10}",
        "gamma/deg", "concurrence", "fidelity", "purity"
    );
    for v in &first.report.visibilities {
        let _ = write!(s, " {:>8}", format!("V({})", v.label));
    }
    s.push('\n');
    for e in &r.entries {
        let _ = write!(
            s,
            "{:>10.2} {:>12.6} {:>12.6} {:>10.6}",
            e.gamma_rad.to_degrees(),
            e.report.concurrence,
            e.report.fidelity_to_target,
            e.report.purity
        );
        for v in &e.report.visibilities {
            let _ = write!(s, " {:>8.4}", v.visibility);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "fidelity target: {}", first.report.target);
    s
}
