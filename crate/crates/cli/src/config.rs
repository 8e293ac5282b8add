//! TOML pipeline configuration.
//!
//! Angles and phases in the config are radians; wavelengths are nm.

use std::fs;
use std::path::{Path, PathBuf};

use biphoton::{BellKind, DichroicSplitter, MleOptions, PhaseMatchModel, TiltPlate};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for every random draw. Required when counts are simulated.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub dbs: DichroicSplitter,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub phase: PhaseConfig,
    /// Overrides the spectral pipeline with a fixed two-qubit state.
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub counts: Option<CountsConfig>,
    #[serde(default)]
    pub tomography: TomographyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            format: Format::default(),
        }
    }
}

/// Either a named preset or a full inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub inline: Option<PhaseMatchModel>,
    /// Replaces the model's operating pump wavelength.
    #[serde(default)]
    pub pump_nm: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            preset: Some("paper".into()),
            inline: None,
            pump_nm: None,
        }
    }
}

impl ModelConfig {
    pub fn name(&self) -> String {
        match (&self.preset, &self.inline) {
            (Some(p), None) => p.clone(),
            _ => "inline".into(),
        }
    }

    pub fn resolve(&self) -> Result<PhaseMatchModel, CliError> {
        let model = match (&self.preset, &self.inline) {
            (Some(name), None) => PhaseMatchModel::preset(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown model preset '{name}'; available presets: {}",
                    PhaseMatchModel::PRESETS.join(", ")
                ))
            })?,
            (None, Some(m)) => m.clone(),
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "[model] sets both 'preset' and 'inline'; keep one".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "[model] needs either 'preset' or an [model.inline] table".into(),
                ))
            }
        };
        let model = match self.pump_nm {
            Some(p) => model.with_pump(p),
            None => model,
        };
        model
            .validate()
            .map_err(|e| CliError::Config(format!("[model]: {e}")))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per frequency axis.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Grid margin beyond each emission point, in channel rms widths.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_points() -> usize {
    513
}
fn default_margin() -> f64 {
    6.0
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: default_points(),
            margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub pump_min_nm: f64,
    pub pump_max_nm: f64,
    pub steps: usize,
}

/// Relative phase between the HV and VH terms. At most one of the fields
/// may be set; with none set the phase is zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(default)]
    pub gamma: Option<f64>,
    /// A family of phases; `visibility` writes one set of curves per entry.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    /// Phase from a tilted birefringent plate.
    #[serde(default)]
    pub tilt_plate: Option<TiltPlate>,
    /// Tilt angles applied to `tilt_plate`, one phase per entry.
    #[serde(default)]
    pub tilts: Option<Vec<f64>>,
}

impl PhaseConfig {
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let set = [
            self.gamma.is_some(),
            self.gammas.is_some(),
            self.tilt_plate.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if set > 1 {
            return Err(CliError::Config(
                "[phase] takes one of 'gamma', 'gammas' or 'tilt_plate'".into(),
            ));
        }
        if self.tilts.is_some() && self.tilt_plate.is_none() {
            return Err(CliError::Config(
                "[phase] 'tilts' needs a [phase.tilt_plate] table".into(),
            ));
        }
        let phases = if let Some(g) = self.gamma {
            vec![g]
        } else if let Some(gs) = &self.gammas {
            if gs.is_empty() {
                return Err(CliError::Config("[phase] 'gammas' is empty".into()));
            }
            gs.clone()
        } else if let Some(plate) = &self.tilt_plate {
            let tilts = self.tilts.clone().unwrap_or_else(|| vec![plate.tilt]);
            tilts
                .into_iter()
                .map(|t| {
                    biphoton::tilt_to_gamma(&plate.with_tilt(t))
                        .map_err(|e| CliError::Config(format!("[phase.tilt_plate]: {e}")))
                })
                .collect::<Result<_, _>>()?
        } else {
            vec![0.0]
        };
        if let Some(g) = phases.iter().find(|g| !g.is_finite()) {
            return Err(CliError::Config(format!("[phase] phase {g} is not finite")));
        }
        Ok(phases)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    /// `dm_from_overlap(p_hv, p_vh, q_abs * exp(i q_arg))`; the configured
    /// phase is added on top.
    Overlap {
        p_hv: f64,
        p_vh: f64,
        q_abs: f64,
        #[serde(default)]
        q_arg: f64,
    },
    Bell {
        bell: BellKind,
    },
    Werner {
        p: f64,
        bell: BellKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_scan_points")]
    pub points: usize,
    /// Scan span in periods of pi.
    #[serde(default = "default_periods")]
    pub periods: f64,
    /// Fixed signal analyzer of each fringe.
    #[serde(default = "default_signal_bases")]
    pub signal_bases: Vec<String>,
}

fn default_scan_points() -> usize {
    73
}
fn default_periods() -> f64 {
    1.0
}
fn default_signal_bases() -> Vec<String> {
    ["H", "V", "D", "A"].map(String::from).to_vec()
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            points: default_scan_points(),
            periods: default_periods(),
            signal_bases: default_signal_bases(),
        }
    }
}

impl ScanConfig {
    pub fn bases(&self) -> Result<Vec<biphoton::NamedBasis>, CliError> {
        if self.signal_bases.is_empty() {
            return Err(CliError::Config("[scan] 'signal_bases' is empty".into()));
        }
        self.signal_bases
            .iter()
            .map(|s| {
                s.parse().map_err(|_| {
                    CliError::Config(format!(
                        "[scan] unknown basis '{s}'; use H, V, D, A, R or L"
                    ))
                })
            })
            .collect()
    }
}

/// Count-simulation parameters; the seed comes from the top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsConfig {
    /// Pairs/s before detection losses.
    pub pair_rate: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub background_rate: f64,
    #[serde(default = "unit")]
    pub signal_efficiency: f64,
    #[serde(default = "unit")]
    pub idler_efficiency: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    /// Target for the fidelity column of the report.
    #[serde(default = "default_target")]
    pub target: BellKind,
    #[serde(default)]
    pub mle: MleOptions,
}

fn default_target() -> BellKind {
    BellKind::PsiPlus
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            target: default_target(),
            mle: MleOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks everything that does not need the output directory.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.state.is_none() {
            self.model.resolve()?;
        }
        if self.grid.points < 3 || !(self.grid.margin > 0.0 && self.grid.margin.is_finite()) {
            return Err(CliError::Config(format!(
                "[grid] needs points >= 3 and margin > 0, got {} and {}",
                self.grid.points, self.grid.margin
            )));
        }
        self.dbs
            .validate()
            .map_err(|e| CliError::Config(format!("[dbs]: {e}")))?;
        if let Some(s) = &self.sweep {
            if s.steps < 2 {
                return Err(CliError::Config(format!(
                    "[sweep] steps = {}; a sweep needs at least 2 pump wavelengths",
                    s.steps
                )));
            }
            if !(s.pump_min_nm < s.pump_max_nm) {
                return Err(CliError::Config(format!(
                    "[sweep] pump_min_nm ({}) must be below pump_max_nm ({})",
                    s.pump_min_nm, s.pump_max_nm
                )));
            }
        }
        let phases = self.phase.resolve()?;
        if matches!(
            self.state,
            Some(StateConfig::Bell { .. } | StateConfig::Werner { .. })
        ) && phases.iter().any(|&g| g != 0.0)
        {
            return Err(CliError::Config(
                "[phase] only applies to overlap states and the spectral pipeline".into(),
            ));
        }
        self.scan.bases()?;
        if let Some(c) = &self.counts {
            self.simulation(c, 0)
                .validate()
                .map_err(|e| CliError::Config(format!("[counts]: {e}")))?;
        }
        self.tomography
            .mle
            .validate()
            .map_err(|e| CliError::Config(format!("[tomography.mle]: {e}")))?;
        Ok(())
    }

    pub fn simulation(&self, c: &CountsConfig, seed: u64) -> biphoton::CountSimulation {
        biphoton::CountSimulation {
            pair_rate: c.pair_rate,
            duration_s: c.duration_s,
            background_rate: c.background_rate,
            seed,
            signal_efficiency: c.signal_efficiency,
            idler_efficiency: c.idler_efficiency,
        }
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Config(
                "counts are simulated but no seed is set; add 'seed = N' or pass --seed".into(),
            )
        })
    }

    pub fn require_counts(&self) -> Result<&CountsConfig, CliError> {
        self.counts
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [counts] table".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::exit;

    fn config_error(text: &str) -> String {
        match PipelineConfig::from_toml(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = PipelineConfig::from_toml("").unwrap();
        assert_eq!(cfg.model.name(), "paper");
        assert_eq!(cfg.grid.points, 513);
        assert_eq!(cfg.scan.points, 73);
        assert_eq!(cfg.phase.resolve().unwrap(), vec![0.0]);
        assert_eq!(cfg.output.format, Format::Both);
        assert!(cfg.seed.is_none());
    }

    #[test]
    fn sweeps_need_two_steps_and_an_ordered_range() {
        let base = "[sweep]\npump_min_nm = 776.0\npump_max_nm = 778.0\n";
        assert!(config_error(&format!("{base}steps = 1\n")).contains("steps"));
        assert!(PipelineConfig::from_toml(&format!("{base}steps = 2\n")).is_ok());
        let reversed = "[sweep]\npump_min_nm = 778.0\npump_max_nm = 776.0\nsteps = 5\n";
        assert!(config_error(reversed).contains("pump_min_nm"));
    }

    #[test]
    fn phase_sources_are_exclusive() {
        let m = config_error("[phase]\ngamma = 0.1\ngammas = [0.2]\n");
        assert!(m.contains("one of"));
        assert!(config_error("[phase]\ntilts = [0.1]\n").contains("tilt_plate"));
        assert!(config_error("[phase]\ngammas = []\n").contains("empty"));
        let cfg = PipelineConfig::from_toml("[phase]\ngammas = [0.0, 1.0]\n").unwrap();
        assert_eq!(cfg.phase.resolve().unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn bell_states_reject_a_phase() {
        let text = "[state]\nkind = \"bell\"\nbell = \"psi_plus\"\n[phase]\ngamma = 0.5\n";
        assert!(config_error(text).contains("[phase]"));
    }

    #[test]
    fn unknown_bases_and_presets_are_config_errors() {
        assert!(config_error("[scan]\nsignal_bases = [\"X\"]\n").contains("X"));
        let e = PipelineConfig::from_toml("[model]\npreset = \"nope\"\n").unwrap_err();
        assert_eq!(e.exit_code(), exit::CONFIG);
    }

    #[test]
    fn counts_are_validated_and_need_a_seed() {
        assert!(
            config_error("[counts]\npair_rate = -1.0\nduration_s = 1.0\n").contains("[counts]")
        );
        let cfg =
            PipelineConfig::from_toml("[counts]\npair_rate = 10.0\nduration_s = 1.0\n").unwrap();
        assert!(cfg.require_seed().is_err());
        assert_eq!(cfg.simulation(cfg.require_counts().unwrap(), 3).seed, 3);
    }
}
