use std::collections::BTreeMap;

use mgtd_core::{LabelMap, ModelPreset, NUM_CLASSES};
use serde::{Deserialize, Serialize};

use crate::LoadError;

/// File name of the metadata inside an artifact directory.
pub const METADATA_FILE: &str = "metadata.json";
pub const MODEL_FILE: &str = "model.onnx";
pub const TOKENIZER_FILE: &str = "tokenizer.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphInput {
    InputIds,
    AttentionMask,
    TokenTypeIds,
}

impl GraphInput {
    pub fn name(self) -> &'static str {
        match self {
            GraphInput::InputIds => "input_ids",
            GraphInput::AttentionMask => "attention_mask",
            GraphInput::TokenTypeIds => "token_type_ids",
        }
    }
}

/// Whether the graph's output still needs a softmax.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphOutput {
    #[default]
    Logits,
    Probabilities,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialTokens {
    /// Ids placed before the content of every chunk, e.g. `[CLS]`.
    #[serde(default)]
    pub prefix: Vec<u32>,
    /// Ids placed after the content, e.g. `[SEP]`.
    #[serde(default)]
    pub suffix: Vec<u32>,
    pub pad: u32,
    #[serde(default)]
    pub unk: Option<u32>,
}

impl SpecialTokens {
    pub fn overhead(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }
}

fn default_inputs() -> Vec<GraphInput> {
    vec![GraphInput::InputIds, GraphInput::AttentionMask]
}

/// Contents of `metadata.json` in an exported artifact directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMetadata {
    pub preset: ModelPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_size: Option<usize>,
    pub max_input_length: usize,
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_map: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<usize>,
    pub special_tokens: SpecialTokens,
    #[serde(default = "default_inputs")]
    pub inputs: Vec<GraphInput>,
    #[serde(default)]
    pub output: GraphOutput,
}

impl ArtifactMetadata {
    /// Internal consistency: class count, preset architecture and label map.
    pub fn validate(&self) -> Result<(), LoadError> {
        if self.num_classes != NUM_CLASSES {
            return Err(LoadError::ClassCountMismatch { expected: NUM_CLASSES, found: self.num_classes });
        }
        if let Some(layers) = self.layers.filter(|&l| l != self.preset.layers()) {
            return Err(LoadError::MetadataMismatch(format!(
                "{} preset has {} layers, metadata says {layers}",
                self.preset,
                self.preset.layers()
            )));
        }
        if let Some(hidden) = self.hidden_size.filter(|&h| h != self.preset.hidden_size()) {
            return Err(LoadError::MetadataMismatch(format!(
                "{} preset has hidden size {}, metadata says {hidden}",
                self.preset,
                self.preset.hidden_size()
            )));
        }
        if self.max_input_length <= self.special_tokens.overhead() {
            return Err(LoadError::MetadataMismatch(format!(
                "max_input_length {} leaves no room after {} special tokens",
                self.max_input_length,
                self.special_tokens.overhead()
            )));
        }
        if !self.inputs.contains(&GraphInput::InputIds) {
            return Err(LoadError::MetadataMismatch("inputs must include input_ids".into()));
        }
        self.labels()?;
        Ok(())
    }

    pub fn labels(&self) -> Result<LabelMap, LoadError> {
        match &self.label_map {
            None => Ok(LabelMap::default()),
            Some(entries) => {
                LabelMap::from_entries(entries).map_err(|e| LoadError::MetadataMismatch(format!("label_map: {e}")))
            }
        }
    }
}
