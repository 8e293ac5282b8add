//! Output files, written atomically through a temporary file in the target
//! directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// Creates the directory if needed and checks that it is writable.
    pub fn create(root: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Config(format!("output directory {}: {e}", root.display())))?;
        NamedTempFile::new_in(root).map_err(|e| {
            CliError::Config(format!(
                "output directory {} is not writable: {e}",
                root.display()
            ))
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut tmp = NamedTempFile::new_in(path.parent().unwrap_or(&self.root))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Output(e.error))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    /// Writes `name` as pretty JSON if the format includes JSON.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.format.json() {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Output(std::io::Error::other(e)))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `name` as CSV if the format includes CSV.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        if !self.format.csv() {
            return Ok(());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Output(std::io::Error::other(e));
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Output(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes preformatted CSV text if the format includes CSV.
    pub fn csv_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        if !self.format.csv() {
            return Ok(());
        }
        self.write_bytes(name, text.as_bytes())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
