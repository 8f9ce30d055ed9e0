use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use profile_gan::gan::GanConfig;
use profile_gan::synthesis::{ForecastTarget, SynthesisConfig};
use profile_gan::synthetic::FamilySpec;

use crate::exit::usage;

/// Contents of a `--config` TOML file. Command-line flags override it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: DataSection,
    pub gan: GanConfig,
    pub synthesis: SynthesisConfig,
    pub outage: Option<OutageSection>,
    pub targets: Vec<ForecastTarget>,
    pub models: Vec<PathBuf>,
    pub synth: Option<SynthSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub data: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub store: Option<PathBuf>,
    /// Closed set of accepted type labels for ingestion.
    pub types: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageSection {
    pub forced_outage_rate: f64,
    #[serde(default = "default_mttr")]
    pub mttr_hours: f64,
}

pub fn default_mttr() -> f64 {
    24.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub families: Vec<FamilySpec>,
    pub years: Vec<i32>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Every referenced input path must exist.
    pub fn validate(&self) -> Result<()> {
        let paths = [&self.data.data, &self.data.meta, &self.data.store]
            .into_iter()
            .flatten()
            .chain(&self.models);
        for p in paths {
            if !p.exists() {
                return Err(usage(format!(
                    "config references missing path {}",
                    p.display()
                )));
            }
        }
        self.gan.validate()?;
        self.synthesis.validate()?;
        Ok(())
    }
}
