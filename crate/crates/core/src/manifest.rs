//! Run manifest: resolved configuration and the list of files a run writes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Config, SeedSource};
use crate::error::{Error, Result};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub output_dir: PathBuf,
    /// Every file the run writes, relative to `output_dir`.
    pub outputs: Vec<String>,
    /// Fully resolved configuration; pass this file as `--config` to replay.
    pub config: Config,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: Option<&Path>,
        config: &Config,
        seed_source: SeedSource,
        output_dir: &Path,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            seed: config.seed,
            seed_source,
            output_dir: output_dir.to_path_buf(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn declare(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let path = self.output_dir.join(&name);
        if !self.outputs.contains(&name) {
            self.outputs.push(name);
        }
        path
    }

    pub fn path_of(&self, name: &str) -> Result<PathBuf> {
        if self.outputs.iter().any(|o| o == name) {
            Ok(self.output_dir.join(name))
        } else {
            Err(Error::InvalidParameter(format!(
                "output {name:?} was not declared in the manifest"
            )))
        }
    }

    /// Writes the manifest as `manifest_name` inside the output directory.
    pub fn write(&self, manifest_name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.output_dir)?;
        let path = self.output_dir.join(manifest_name);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
