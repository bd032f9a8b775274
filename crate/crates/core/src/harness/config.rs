use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifact::{read_to_string, ArtifactMeta};
use crate::error::{Error, Result};
use crate::scoring::Setup;
use crate::transforms::Mode;

pub const DEFAULT_SIZES: [usize; 12] = [0, 100, 500, 1000, 2000, 4000, 6000, 8000, 10000, 12000, 14000, 16000];

pub const ENDPOINT_ENV: &str = "WINOCHECK_SCORER_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Wsc,
    Winogrande,
    /// A file previously written by `ingest`.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub format: DatasetFormat,
    pub path: PathBuf,
    /// Ids removed after pairing, one per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerMode {
    #[default]
    File,
    Http,
}

impl fmt::Display for ScorerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScorerMode::File => "file",
            ScorerMode::Http => "http",
        })
    }
}

impl FromStr for ScorerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "file" => Ok(ScorerMode::File),
            "http" => Ok(ScorerMode::Http),
            _ => Err(format!("unknown scorer mode {s:?} (expected file or http)")),
        }
    }
}

fn default_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    #[serde(default)]
    pub mode: ScorerMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Directory holding `<dataset>.<setup>.responses.jsonl` files (file mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses: Option<PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    /// Number of requests re-queried to check the scorer is deterministic.
    #[serde(default)]
    pub verify_determinism: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            mode: ScorerMode::File,
            endpoint: None,
            responses: None,
            max_in_flight: default_in_flight(),
            verify_determinism: 0,
        }
    }
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}

fn default_seeds() -> usize {
    3
}

fn default_holdout() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Name of the training dataset among `datasets`.
    pub dataset: String,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_holdout")]
    pub holdout: usize,
}

fn all_modes() -> Vec<Mode> {
    vec![Mode::NoCands, Mode::PartSent, Mode::ZeroShot]
}

fn all_setups() -> Vec<Setup> {
    Setup::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Not part of the config hash, so identical runs in different
    /// directories produce identical files.
    pub output_dir: PathBuf,
    pub datasets: Vec<DatasetConfig>,
    #[serde(default = "all_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "all_setups")]
    pub setups: Vec<Setup>,
    #[serde(default)]
    pub scorer: ScorerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<SplitConfig>,
    /// Directory relative paths are resolved against; the config file's own
    /// directory when loaded from disk.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(raw: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(raw).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::from_toml(&raw, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn check(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("dataset name {} used twice", w[0])));
        }
        for d in &self.datasets {
            if d.name.is_empty() || d.name.contains(['/', '\\', '.']) {
                return Err(Error::Config(format!(
                    "dataset name {:?} must be non-empty without '/', '\\' or '.'",
                    d.name
                )));
            }
        }
        if self.scorer.max_in_flight == 0 {
            return Err(Error::Config("scorer.max_in_flight must be at least 1".into()));
        }
        if let Some(s) = &self.splits {
            if self.dataset(&s.dataset).is_none() {
                return Err(Error::Config(format!(
                    "splits.dataset {} is not a configured dataset",
                    s.dataset
                )));
            }
            if s.n_seeds == 0 {
                return Err(Error::Config("splits.n_seeds must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn dataset(&self, name: &str) -> Option<&DatasetConfig> {
        self.datasets.iter().find(|d| d.name == name)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn run_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Input files named by the config that must exist before `ingest`.
    pub fn check_inputs(&self) -> Result<()> {
        for d in &self.datasets {
            for p in std::iter::once(&d.path).chain(&d.exclusions) {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(Error::Config(format!(
                        "dataset {}: input {} does not exist",
                        d.name,
                        full.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the config (sorted keys).
    /// Fields that only choose where to write, which stages to run, or how
    /// hard to drive the scorer are left out.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            for key in ["output_dir", "modes", "setups"] {
                obj.remove(key);
            }
            if let Some(scorer) = obj.get_mut("scorer").and_then(|s| s.as_object_mut()) {
                scorer.remove("max_in_flight");
                scorer.remove("verify_determinism");
            }
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn meta(&self, kind: &str) -> ArtifactMeta {
        ArtifactMeta::new(kind, self.hash(), self.seed)
    }
}
