//! Config-driven pipelines on top of the `biphoton` library.
//!
//! Each subcommand reads one TOML file, optionally overridden by command-line
//! flags, and writes its outputs into a single directory. CSV files use
//! degrees and nanometers; JSON files use radians and rad/s.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::{Path, PathBuf};

use config::PipelineConfig;
use error::CliError;
use output::{Format, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectra,
    Visibility,
    Tomography,
    Report,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<PipelineConfig, CliError> {
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &overrides.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = overrides.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

/// Runs one command and returns the paths it wrote plus any text for the
/// terminal.
pub fn run(command: Command, cfg: &PipelineConfig) -> Result<(Vec<PathBuf>, String), CliError> {
    let mut out = OutputDir::create(&cfg.output.dir, cfg.output.format)?;
    let text = match command {
        Command::Spectra => {
            let s = commands::spectra::run(cfg, &mut out)?;
            format!(
                "optimum pump {:.3} nm: 2|q| = {:.4}\n",
                s.optimum.pump_nm, s.optimum.overlap_2q
            )
        }
        Command::Visibility => {
            let v = commands::visibility::run(cfg, &mut out)?;
            let mut t = String::new();
            for f in &v.families {
                for c in &f.curves {
                    t += &format!(
                        "gamma {:>7.2} deg  signal {}  visibility {:.4}\n",
                        f.gamma_rad.to_degrees(),
                        c.signal,
                        c.fit.visibility
                    );
                }
            }
            t
        }
        Command::Tomography => {
            let r = commands::tomography::run(cfg, &mut out)?;
            format!(
                "MLE: concurrence {:.4}, fidelity {:.4}, purity {:.4} ({} iterations)\n",
                r.mle.concurrence, r.mle.fidelity_to_target, r.mle.purity, r.iterations
            )
        }
        Command::Report => commands::report::table(&commands::report::run(cfg, &mut out)?),
    };
    Ok((out.written().to_vec(), text))
}
