use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use crate::error::Result;

/// Record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub model: String,
    pub seed: u64,
    pub spec: ModelSpec,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations_run: Option<usize>,
    /// Error of the coarse-only sweep against the reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_error: Option<f64>,
    /// Named summary numbers, such as fitted slopes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, model: &str, seed: u64, spec: ModelSpec) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            model: model.into(),
            seed,
            spec,
            timings: BTreeMap::new(),
            stop_reason: None,
            iterations_run: None,
            initial_error: None,
            metrics: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Writes to a temporary sibling and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, self)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ModelName;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let mut m = RunManifest::new("run", "toggle", 4, ModelSpec::builtin(ModelName::Toggle));
        m.timings.insert("fine".into(), 1.5);
        m.write_atomic(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
