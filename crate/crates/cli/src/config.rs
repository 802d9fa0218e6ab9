//! Run configuration shared by the subcommands.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use mgtd_core::scorer::INPUT_LENGTHS;
use mgtd_core::{Aggregation, EnsembleConfig, LabelId, LabelMap, Split};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Relative model and rule paths resolve against this directory when set.
pub const ARTIFACTS_ROOT_ENV: &str = "MGTD_ARTIFACTS_ROOT";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
}

impl DatasetPaths {
    pub fn get(&self, split: Split) -> Option<&PathBuf> {
        match split {
            Split::Train => self.train.as_ref(),
            Split::Dev => self.dev.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }

    pub fn set(&mut self, split: Split, path: PathBuf) {
        match split {
            Split::Train => self.train = Some(path),
            Split::Dev => self.dev = Some(path),
            Split::Test => self.test = Some(path),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Exported artifact directory.
    Onnx {
        id: String,
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tokenizer: Option<PathBuf>,
    },
    /// Rule-driven scorer; `rule` is a JSON object mapping words to label ids.
    Mock {
        id: String,
        rule: PathBuf,
        #[serde(default)]
        noise_rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl ModelSpec {
    pub fn id(&self) -> &str {
        match self {
            ModelSpec::Onnx { id, .. } | ModelSpec::Mock { id, .. } => id,
        }
    }
}

fn default_max_subtokens() -> usize {
    512
}

fn default_seed() -> u64 {
    42
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub datasets: DatasetPaths,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_max_subtokens")]
    pub max_subtokens: usize,
    #[serde(default)]
    pub allow_custom_length: bool,
    #[serde(default)]
    pub aggregation: Aggregation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub write_distributions: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_map: Option<BTreeMap<String, String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    /// Reads a config file; relative dataset paths resolve against its
    /// directory, model paths against the artifacts root (or that directory).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let rebase = |p: &mut PathBuf, root: &Path| {
            if p.is_relative() {
                *p = root.join(&*p);
            }
        };
        for split in [Split::Train, Split::Dev, Split::Test] {
            if let Some(p) = cfg.datasets.get(split).cloned() {
                let mut p = p;
                rebase(&mut p, &base);
                cfg.datasets.set(split, p);
            }
        }
        let artifacts = artifacts_root().unwrap_or_else(|| base.clone());
        for model in &mut cfg.models {
            match model {
                ModelSpec::Onnx { path, tokenizer, .. } => {
                    rebase(path, &artifacts);
                    if let Some(t) = tokenizer {
                        rebase(t, &artifacts);
                    }
                }
                ModelSpec::Mock { rule, .. } => rebase(rule, &artifacts),
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            rebase(out, &base);
        }
        Ok(cfg)
    }

    /// Checks values and that referenced files exist; errors name the field.
    pub fn validate(&self) -> CliResult<()> {
        if !self.allow_custom_length && !INPUT_LENGTHS.contains(&self.max_subtokens) {
            return Err(CliError::validation(format!(
                "max_subtokens: {} is not one of {:?} (set allow_custom_length to override)",
                self.max_subtokens, INPUT_LENGTHS
            )));
        }
        if self.max_subtokens == 0 {
            return Err(CliError::validation("max_subtokens: must be positive"));
        }
        let mut ids = HashSet::new();
        for (i, model) in self.models.iter().enumerate() {
            if model.id().is_empty() {
                return Err(CliError::validation(format!("models[{i}].id: must not be empty")));
            }
            if !ids.insert(model.id()) {
                return Err(CliError::validation(format!("models[{i}].id: duplicate id {:?}", model.id())));
            }
            match model {
                ModelSpec::Onnx { path, tokenizer, .. } => {
                    if !path.exists() {
                        return Err(CliError::validation(format!("models[{i}].path: {} does not exist", path.display())));
                    }
                    if let Some(t) = tokenizer.as_ref().filter(|t| !t.exists()) {
                        return Err(CliError::validation(format!("models[{i}].tokenizer: {} does not exist", t.display())));
                    }
                }
                ModelSpec::Mock { rule, noise_rate, .. } => {
                    if !rule.is_file() {
                        return Err(CliError::validation(format!("models[{i}].rule: {} does not exist", rule.display())));
                    }
                    if !(0.0..1.0).contains(noise_rate) {
                        return Err(CliError::validation(format!("models[{i}].noise_rate: {noise_rate} is outside [0, 1)")));
                    }
                }
            }
        }
        if let Some(ens) = &self.ensemble {
            ens.validate().map_err(|e| CliError::validation(format!("ensemble.member_ids: {e}")))?;
        }
        self.labels()?;
        Ok(())
    }

    pub fn labels(&self) -> CliResult<LabelMap> {
        match &self.label_map {
            None => Ok(LabelMap::default()),
            Some(entries) => LabelMap::from_entries(entries).map_err(|e| CliError::validation(format!("label_map: {e}"))),
        }
    }
}

pub fn artifacts_root() -> Option<PathBuf> {
    std::env::var_os(ARTIFACTS_ROOT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Reads a `{"word": label, ...}` rule file for the mock backend.
pub fn load_rule(path: &Path) -> CliResult<HashMap<String, LabelId>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let raw: HashMap<String, i64> =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("rule file {}: {e}", path.display())))?;
    raw.into_iter()
        .map(|(w, l)| {
            LabelId::new(l)
                .map(|l| (w, l))
                .map_err(|e| CliError::data(format!("rule file {}: {e}", path.display())))
        })
        .collect()
}
