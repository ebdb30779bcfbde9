use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interchange format version written by this crate.
pub const FORMAT_VERSION: &str = "1.0";
const SUPPORTED_MAJOR: u64 = 1;

/// Where class probabilities live: one indexed file with `model,sample`
/// columns, or one file per model id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityFiles {
    Indexed(PathBuf),
    PerModel(BTreeMap<String, PathBuf>),
}

/// Describes a dataset on disk. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    pub name: String,
    /// Position in this list is the dense class index.
    pub class_names: Vec<String>,
    pub models: usize,
    pub samples: usize,
    pub predictions: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<ProbabilityFiles>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        manifest.check().map_err(|message| Error::Dataset {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn check(&self) -> std::result::Result<(), String> {
        let major = self
            .format_version
            .split('.')
            .next()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| format!("malformed format_version {:?}", self.format_version))?;
        if major != SUPPORTED_MAJOR {
            return Err(format!(
                "unsupported format_version {} (this build reads {SUPPORTED_MAJOR}.x)",
                self.format_version
            ));
        }
        if self.class_names.len() < 2 {
            return Err("class_names must list at least 2 classes".into());
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.class_names.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(format!("duplicate class name {dup:?}"));
        }
        if self.class_names.iter().any(|c| c.trim().is_empty()) {
            return Err("class names must be non-empty".into());
        }
        Ok(())
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    pub fn resolve(base: &Path, file: &Path) -> PathBuf {
        if file.is_absolute() {
            file.to_path_buf()
        } else {
            base.join(file)
        }
    }
}
