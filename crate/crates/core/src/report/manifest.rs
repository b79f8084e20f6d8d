use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::compliance::ComplianceReport;

/// How far a corpus model has progressed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelStatus {
    #[default]
    Raw,
    Translated,
    Compliant,
    Described,
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Pair identifier; defaults to the model file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub model_path: PathBuf,
    #[serde(default)]
    pub status: ModelStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_report: Option<ComplianceReport>,
    /// Set on load when a referenced file is missing.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stale: bool,
}

impl ManifestEntry {
    pub fn new(model_path: impl Into<PathBuf>) -> Self {
        Self {
            id: None,
            model_path: model_path.into(),
            status: ModelStatus::Raw,
            description_path: None,
            reconstruction_path: None,
            last_report: None,
            stale: false,
        }
    }

    pub fn pair_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            self.model_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory relative paths are resolved against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut manifest: Self = serde_json::from_str(&text).map_err(|e| ReportError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.refresh_stale();
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<(), ReportError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(path, text).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// `p` made absolute against the manifest directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Flags entries whose model, description or reconstruction file is missing.
    pub fn refresh_stale(&mut self) {
        let base = self.base_dir.clone();
        let exists = |p: &Path| {
            if p.is_absolute() {
                p.exists()
            } else {
                base.join(p).exists()
            }
        };
        for e in &mut self.entries {
            e.stale = !exists(&e.model_path)
                || e.description_path.as_deref().is_some_and(|p| !exists(p))
                || e.reconstruction_path.as_deref().is_some_and(|p| !exists(p));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stale_entries_are_flagged() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.bpmn"), "x").unwrap();
        let manifest = r#"{"entries": [
            {"model_path": "a.bpmn", "status": "raw"},
            {"model_path": "missing.bpmn", "status": "described", "description_path": "d.txt"}
        ]}"#;
        let path = dir.path().join("manifest.json");
        fs::write(&path, manifest).unwrap();
        let m = CorpusManifest::load(&path).unwrap();
        assert!(!m.entries[0].stale);
        assert!(m.entries[1].stale);
        assert_eq!(m.entries[0].pair_id(), "a");
        assert_eq!(m.entries[1].status, ModelStatus::Described);
    }

    #[test]
    fn status_order() {
        assert!(ModelStatus::Raw < ModelStatus::Translated);
        assert!(ModelStatus::Described < ModelStatus::Reconstructed);
    }
}
