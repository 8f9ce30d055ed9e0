//! Profile store: a directory holding validated hourly data and metadata in
//! the ingestion CSV formats, plus a small JSON manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{hour_timestamp, ingest_hourly_csv, Dataset, HourlyProfile};
use crate::error::{Error, Result};

pub const DATA_FILE: &str = "data.csv";
pub const META_FILE: &str = "meta.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSite {
    pub site_id: String,
    pub generation_type: String,
    pub years: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    /// Closed set of type labels accepted when the store is read back.
    pub types: Vec<String>,
    pub sites: Vec<StoreSite>,
    /// Free-form provenance (source paths, synthetic spec, seed).
    #[serde(default)]
    pub source: serde_json::Value,
}

/// Write `dataset` as a store under `dir`. An existing store is replaced
/// only with `force`.
pub fn write_store(
    dir: &Path,
    dataset: &Dataset,
    source: serde_json::Value,
    force: bool,
) -> Result<StoreManifest> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() && !force {
        return Err(Error::invalid(format!(
            "store {} already exists (use --force to overwrite)",
            dir.display()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let meta_path = dir.join(META_FILE);
    let mut meta = String::from("site_id,type,capacity_mw,intermittent\n");
    for m in &dataset.metas {
        meta.push_str(&format!(
            "{},{},{},{}\n",
            m.site_id,
            m.generation_type.label,
            m.installed_capacity_mw,
            u8::from(m.generation_type.intermittent)
        ));
    }
    fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;

    let data_path = dir.join(DATA_FILE);
    write_data_csv(&data_path, &dataset.profiles)?;

    let manifest = StoreManifest {
        types: dataset
            .registry
            .types()
            .iter()
            .map(|t| t.label.clone())
            .collect(),
        sites: dataset
            .metas
            .iter()
            .map(|m| StoreSite {
                site_id: m.site_id.clone(),
                generation_type: m.generation_type.label.clone(),
                years: dataset
                    .profiles_of_site(&m.site_id)
                    .map(|p| p.year)
                    .collect(),
            })
            .collect(),
        source,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Data(e.to_string()))?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

/// Hourly data in the ingestion format; values are written with full
/// round-trip precision.
pub fn write_data_csv(path: &Path, profiles: &[HourlyProfile]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "timestamp,site_id,power_mw").map_err(io)?;
    for p in profiles {
        for (h, v) in p.values.iter().enumerate() {
            writeln!(w, "{},{},{}", hour_timestamp(p.year, h), p.site_id, v).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_manifest(dir: &Path) -> Result<StoreManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Read a store back through full ingestion validation.
pub fn read_store(dir: &Path) -> Result<Dataset> {
    let manifest = read_manifest(dir)?;
    ingest_hourly_csv(&dir.join(DATA_FILE), &dir.join(META_FILE), &manifest.types)
}

pub fn store_paths(dir: &Path) -> [PathBuf; 3] {
    [
        dir.join(DATA_FILE),
        dir.join(META_FILE),
        dir.join(MANIFEST_FILE),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_dataset, FamilySpec, SynthSpec};

    #[test]
    fn round_trip_and_force() {
        let ds = generate_dataset(&SynthSpec {
            families: vec![FamilySpec::solar("solar"), FamilySpec::duty_block("peaker")],
            years: vec![2021],
            seed: 1,
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_store(dir.path(), &ds, serde_json::Value::Null, false).unwrap();
        assert_eq!(manifest.sites.len(), 2);
        let back = read_store(dir.path()).unwrap();
        assert_eq!(back.registry, ds.registry);
        assert_eq!(back.profiles, ds.profiles);
        assert!(write_store(dir.path(), &ds, serde_json::Value::Null, false).is_err());
        write_store(dir.path(), &ds, serde_json::Value::Null, true).unwrap();
    }
}
