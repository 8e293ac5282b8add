use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jones::{analyzer_projector, AnalyzerSetting, NamedBasis};
use super::scan::coincidence_probability;
use super::PolarimetryError;
use crate::state::DensityMatrix;

/// One analyzer setting pair and what was counted there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub signal: AnalyzerSetting,
    pub idler: AnalyzerSetting,
    pub counts: u64,
    /// Accidental counts from a separate delayed-gate acquisition of the same
    /// duration.
    pub background: u64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyDataset {
    pub records: Vec<TomographyRecord>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "unit")]
    pub signal_efficiency: f64,
    #[serde(default = "unit")]
    pub idler_efficiency: f64,
}

fn unit() -> f64 {
    1.0
}

/// Flat CSV row; angles in degrees.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    signal: String,
    idler: String,
    signal_qwp_deg: f64,
    signal_hwp_deg: f64,
    signal_polarizer_deg: f64,
    idler_qwp_deg: f64,
    idler_hwp_deg: f64,
    idler_polarizer_deg: f64,
    counts: u64,
    background: u64,
    duration_s: f64,
}

fn setting_from_csv(
    name: &str,
    qwp_deg: f64,
    hwp_deg: f64,
    pol_deg: f64,
) -> Result<AnalyzerSetting, PolarimetryError> {
    // Named rows use the canonical angles so that the degree round trip does
    // not perturb them.
    if let Ok(b) = name.parse::<NamedBasis>() {
        let s = AnalyzerSetting::named(b);
        let given = AnalyzerSetting {
            basis: Some(b),
            ..AnalyzerSetting::new(
                qwp_deg.to_radians(),
                hwp_deg.to_radians(),
                pol_deg.to_radians(),
            )
        };
        given.validate()?;
        return Ok(s);
    }
    let s = AnalyzerSetting::new(
        qwp_deg.to_radians(),
        hwp_deg.to_radians(),
        pol_deg.to_radians(),
    );
    s.validate()?;
    Ok(s)
}

impl TomographyDataset {
    pub fn new(records: Vec<TomographyRecord>) -> Self {
        Self {
            records,
            seed: None,
            signal_efficiency: 1.0,
            idler_efficiency: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_counts(&self) -> u64 {
        self.records.iter().map(|r| r.counts).sum()
    }

    pub fn settings(&self) -> Vec<(AnalyzerSetting, AnalyzerSetting)> {
        self.records.iter().map(|r| (r.signal, r.idler)).collect()
    }

    pub fn validate(&self) -> Result<(), PolarimetryError> {
        for (k, r) in self.records.iter().enumerate() {
            r.signal.validate()?;
            r.idler.validate()?;
            if !(r.duration_s > 0.0 && r.duration_s.is_finite()) {
                return Err(PolarimetryError::InvalidDataset(format!(
                    "record {k}: duration {} s must be > 0",
                    r.duration_s
                )));
            }
        }
        for (name, eta) in [
            ("signal", self.signal_efficiency),
            ("idler", self.idler_efficiency),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(PolarimetryError::InvalidDataset(format!(
                    "{name} efficiency {eta} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Whether the records are exactly the 36 pairs of the named 6x6 grid.
    pub fn is_full_protocol(&self) -> bool {
        let mut seen = [[false; 6]; 6];
        for r in &self.records {
            let (Some(s), Some(i)) = (r.signal.basis, r.idler.basis) else {
                return false;
            };
            let idx = |b: NamedBasis| NamedBasis::ALL.iter().position(|x| *x == b).unwrap();
            seen[idx(s)][idx(i)] = true;
        }
        self.records.len() == 36 && seen.iter().flatten().all(|&x| x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, PolarimetryError> {
        let d: Self =
            serde_json::from_str(s).map_err(|e| PolarimetryError::InvalidDataset(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    /// Records only; seed and efficiencies live in the JSON form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PolarimetryError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(CsvRow {
                signal: r.signal.label(),
                idler: r.idler.label(),
                signal_qwp_deg: r.signal.qwp_angle.to_degrees(),
                signal_hwp_deg: r.signal.hwp_angle.to_degrees(),
                signal_polarizer_deg: r.signal.polarizer_angle.to_degrees(),
                idler_qwp_deg: r.idler.qwp_angle.to_degrees(),
                idler_hwp_deg: r.idler.hwp_angle.to_degrees(),
                idler_polarizer_deg: r.idler.polarizer_angle.to_degrees(),
                counts: r.counts,
                background: r.background,
                duration_s: r.duration_s,
            })
            .map_err(|e| PolarimetryError::InvalidDataset(e.to_string()))?;
        }
        out.flush()
            .map_err(|e| PolarimetryError::InvalidDataset(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, PolarimetryError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut records = Vec::new();
        for (k, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| PolarimetryError::InvalidDataset(format!("row {k}: {e}")))?;
            records.push(TomographyRecord {
                signal: setting_from_csv(
                    &row.signal,
                    row.signal_qwp_deg,
                    row.signal_hwp_deg,
                    row.signal_polarizer_deg,
                )?,
                idler: setting_from_csv(
                    &row.idler,
                    row.idler_qwp_deg,
                    row.idler_hwp_deg,
                    row.idler_polarizer_deg,
                )?,
                counts: row.counts,
                background: row.background,
                duration_s: row.duration_s,
            });
        }
        let d = Self::new(records);
        d.validate()?;
        Ok(d)
    }
}

/// The 36 setting pairs of the 6x6 named grid, signal-major in
/// `H, V, D, A, R, L` order.
pub fn protocol_36() -> Vec<(AnalyzerSetting, AnalyzerSetting)> {
    let mut out = Vec::with_capacity(36);
    for s in NamedBasis::ALL {
        for i in NamedBasis::ALL {
            out.push((AnalyzerSetting::named(s), AnalyzerSetting::named(i)));
        }
    }
    out
}

/// Source and detector parameters for count simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountSimulation {
    /// Pair rate before detection losses, pairs/s.
    pub pair_rate: f64,
    pub duration_s: f64,
    /// Flat accidental rate, counts/s.
    #[serde(default)]
    pub background_rate: f64,
    pub seed: u64,
    #[serde(default = "unit")]
    pub signal_efficiency: f64,
    #[serde(default = "unit")]
    pub idler_efficiency: f64,
}

impl CountSimulation {
    pub fn new(pair_rate: f64, duration_s: f64, background_rate: f64, seed: u64) -> Self {
        Self {
            pair_rate,
            duration_s,
            background_rate,
            seed,
            signal_efficiency: 1.0,
            idler_efficiency: 1.0,
        }
    }

    /// Detected pair rate, pairs/s.
    pub fn detected_rate(&self) -> f64 {
        self.pair_rate * self.signal_efficiency * self.idler_efficiency
    }

    pub fn validate(&self) -> Result<(), PolarimetryError> {
        let bad = |m: String| Err(PolarimetryError::InvalidRates(m));
        if !(self.pair_rate >= 0.0 && self.pair_rate.is_finite()) {
            return bad(format!("pair rate {}", self.pair_rate));
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return bad(format!("background rate {}", self.background_rate));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration {} s", self.duration_s));
        }
        for eta in [self.signal_efficiency, self.idler_efficiency] {
            if !(eta > 0.0 && eta <= 1.0) {
                return bad(format!("efficiency {eta} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Mean coincidence counts per setting pair, background included.
pub fn expected_counts(
    dm: &DensityMatrix,
    settings: &[(AnalyzerSetting, AnalyzerSetting)],
    sim: &CountSimulation,
) -> Result<Vec<f64>, PolarimetryError> {
    sim.validate()?;
    let pairs = sim.detected_rate() * sim.duration_s;
    let floor = sim.background_rate * sim.duration_s;
    settings
        .iter()
        .map(|(s, i)| {
            s.validate()?;
            i.validate()?;
            let p = coincidence_probability(dm, &analyzer_projector(s), &analyzer_projector(i));
            Ok(pairs * p + floor)
        })
        .collect()
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// Poisson counts for every setting pair. Setting `k` draws from its own
/// ChaCha20 stream `k` under `sim.seed`, so the result does not depend on
/// evaluation order.
pub fn simulate_counts(
    dm: &DensityMatrix,
    settings: &[(AnalyzerSetting, AnalyzerSetting)],
    sim: &CountSimulation,
) -> Result<TomographyDataset, PolarimetryError> {
    let means = expected_counts(dm, settings, sim)?;
    let floor = sim.background_rate * sim.duration_s;
    let records = settings
        .par_iter()
        .zip(means.par_iter())
        .enumerate()
        .map(|(k, ((s, i), &mean))| {
            let mut rng = ChaCha20Rng::seed_from_u64(sim.seed);
            rng.set_stream(k as u64);
            let counts = poisson(mean, &mut rng);
            let background = poisson(floor, &mut rng);
            TomographyRecord {
                signal: *s,
                idler: *i,
                counts,
                background,
                duration_s: sim.duration_s,
            }
        })
        .collect();
    Ok(TomographyDataset {
        records,
        seed: Some(sim.seed),
        signal_efficiency: sim.signal_efficiency,
        idler_efficiency: sim.idler_efficiency,
    })
}

/// Dataset whose counts are the expected counts rounded to integers, with
/// no background. `total_per_setting` scales the probabilities.
pub fn noiseless_dataset(
    dm: &DensityMatrix,
    settings: &[(AnalyzerSetting, AnalyzerSetting)],
    total_per_setting: f64,
) -> Result<TomographyDataset, PolarimetryError> {
    let sim = CountSimulation::new(total_per_setting, 1.0, 0.0, 0);
    let means = expected_counts(dm, settings, &sim)?;
    Ok(TomographyDataset::new(
        settings
            .iter()
            .zip(means)
            .map(|((s, i), m)| TomographyRecord {
                signal: *s,
                idler: *i,
                counts: m.round() as u64,
                background: 0,
                duration_s: 1.0,
            })
            .collect(),
    ))
}
