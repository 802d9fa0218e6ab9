use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mgtd_core::alignment::Subtokenizer;
use mgtd_core::distribution::softmax;
use mgtd_core::scorer::{ChunkInput, ChunkScores, Scorer, ScorerError};
use mgtd_core::{LabelMap, ModelPreset, Probability, NUM_CLASSES};
use sha2::{Digest, Sha256};
use tract_onnx::prelude::*;
use tract_onnx::tract_hir::infer::Factoid;

use crate::metadata::{ArtifactMetadata, GraphInput, GraphOutput, METADATA_FILE, MODEL_FILE, TOKENIZER_FILE};
use crate::tokenizer::HfSubtokenizer;
use crate::LoadError;

/// Tagger backed by an optimized ONNX plan. Every chunk is padded to the
/// artifact's `max_input_length`.
pub struct OnnxScorer {
    id: String,
    plan: Arc<TypedRunnableModel>,
    /// Graph input order, resolved by name.
    inputs: Vec<GraphInput>,
    tokenizer: HfSubtokenizer,
    metadata: ArtifactMetadata,
    labels: LabelMap,
}

impl std::fmt::Debug for OnnxScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxScorer").field("id", &self.id).field("metadata", &self.metadata).finish()
    }
}

fn require(path: PathBuf) -> Result<PathBuf, LoadError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(LoadError::MissingFile(path))
    }
}

fn graph_err(e: impl std::fmt::Display) -> LoadError {
    LoadError::Graph(e.to_string())
}

/// Loads the artifact in `dir` with its own `tokenizer.json`.
pub fn load_artifact_dir(dir: impl AsRef<Path>) -> Result<OnnxScorer, LoadError> {
    let dir = dir.as_ref();
    load_serialized_scorer(dir, dir.join(TOKENIZER_FILE))
}

/// `model_path` is an artifact directory or the `.onnx` file inside one; the
/// metadata is read from the same directory. `tokenizer_path` is a
/// `tokenizer.json` file or a directory holding one.
pub fn load_serialized_scorer(model_path: impl AsRef<Path>, tokenizer_path: impl AsRef<Path>) -> Result<OnnxScorer, LoadError> {
    let model_path = model_path.as_ref();
    let (dir, graph_path) = if model_path.is_dir() {
        (model_path.to_path_buf(), model_path.join(MODEL_FILE))
    } else {
        let dir = model_path.parent().map(Path::to_path_buf).unwrap_or_default();
        (dir, model_path.to_path_buf())
    };
    let graph_path = require(graph_path)?;
    let meta_path = require(dir.join(METADATA_FILE))?;
    let tokenizer_path = tokenizer_path.as_ref();
    let tokenizer_path = require(if tokenizer_path.is_dir() {
        tokenizer_path.join(TOKENIZER_FILE)
    } else {
        tokenizer_path.to_path_buf()
    })?;

    let metadata: ArtifactMetadata = serde_json::from_slice(&fs::read(&meta_path)?)
        .map_err(|source| LoadError::Metadata { path: meta_path.clone(), source })?;
    metadata.validate()?;
    let labels = metadata.labels()?;

    if let Some(expected) = &metadata.tokenizer_sha256 {
        let digest = hex::encode(Sha256::digest(fs::read(&tokenizer_path)?));
        if !digest.eq_ignore_ascii_case(expected) {
            return Err(LoadError::MetadataMismatch(format!(
                "tokenizer {} (sha256 {digest}) is not the one this {} artifact was exported with",
                tokenizer_path.display(),
                metadata.preset
            )));
        }
    }
    let tokenizer = HfSubtokenizer::from_file(&tokenizer_path, metadata.special_tokens.overhead(), metadata.special_tokens.unk)?;
    if let Some(vocab) = metadata.vocab_size.filter(|&v| v != tokenizer.vocab_size()) {
        return Err(LoadError::MetadataMismatch(format!(
            "tokenizer vocabulary has {} entries, artifact expects {vocab}",
            tokenizer.vocab_size()
        )));
    }

    let (plan, inputs) = build_plan(&graph_path, &metadata)?;
    let id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "onnx".into());
    Ok(OnnxScorer { id, plan, inputs, tokenizer, metadata, labels })
}

fn build_plan(path: &Path, meta: &ArtifactMetadata) -> Result<(Arc<TypedRunnableModel>, Vec<GraphInput>), LoadError> {
    let mut model = tract_onnx::onnx().model_for_path(path).map_err(graph_err)?;
    let outlets = model.input_outlets().map_err(graph_err)?.to_vec();
    let mut order = Vec::with_capacity(outlets.len());
    for outlet in &outlets {
        let name = &model.node(outlet.node).name;
        let input = meta
            .inputs
            .iter()
            .copied()
            .find(|i| i.name() == name)
            .ok_or_else(|| LoadError::MetadataMismatch(format!("graph input {name:?} is not declared in metadata")))?;
        order.push(input);
    }
    if let Some(missing) = meta.inputs.iter().find(|i| !order.contains(i)) {
        return Err(LoadError::MetadataMismatch(format!("graph has no input named {:?}", missing.name())));
    }

    let length = meta.max_input_length;
    for i in 0..outlets.len() {
        let fact = model.input_fact(i).map_err(graph_err)?;
        if let Some(declared) = fact.shape.dim(1).and_then(|d| d.concretize()).and_then(|d| d.to_i64().ok()) {
            if declared as usize != length {
                return Err(LoadError::MetadataMismatch(format!(
                    "graph expects input length {declared}, metadata says {length}"
                )));
            }
        }
        model
            .set_input_fact(i, InferenceFact::dt_shape(i64::datum_type(), tvec!(1, length)))
            .map_err(graph_err)?;
    }
    let typed = model.into_optimized().map_err(graph_err)?;
    let out_fact = typed.output_fact(0).map_err(graph_err)?;
    let classes = out_fact.shape.as_concrete().and_then(|s| s.last().copied());
    match classes {
        Some(NUM_CLASSES) => {}
        Some(found) => return Err(LoadError::ClassCountMismatch { expected: NUM_CLASSES, found }),
        None => return Err(LoadError::Graph("output shape is not concrete".into())),
    }
    let plan = typed.into_runnable().map_err(graph_err)?;
    Ok((plan, order))
}

impl OnnxScorer {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn metadata(&self) -> &ArtifactMetadata {
        &self.metadata
    }

    pub fn preset(&self) -> ModelPreset {
        self.metadata.preset
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.labels
    }

    /// Class probabilities (f32) for one chunk of content subtokens.
    fn run(&self, content: &[u32]) -> Result<Vec<[f32; NUM_CLASSES]>, ScorerError> {
        let special = &self.metadata.special_tokens;
        let length = self.metadata.max_input_length;
        let used = content.len() + special.overhead();
        if used > length {
            return Err(ScorerError::InputTooLong { requested: used, limit: length });
        }
        let mut ids: Vec<i64> = Vec::with_capacity(length);
        ids.extend(special.prefix.iter().map(|&t| t as i64));
        ids.extend(content.iter().map(|&t| t as i64));
        ids.extend(special.suffix.iter().map(|&t| t as i64));
        ids.resize(length, special.pad as i64);
        let mut mask = vec![0i64; length];
        mask[..used].fill(1);

        let backend = |e: TractError| ScorerError::Backend(e.to_string());
        let mut feed: TVec<TValue> = tvec!();
        for input in &self.inputs {
            let data = match input {
                GraphInput::InputIds => ids.clone(),
                GraphInput::AttentionMask => mask.clone(),
                GraphInput::TokenTypeIds => vec![0; length],
            };
            let tensor = Tensor::from_shape(&[1, length], &data).map_err(backend)?;
            feed.push(tensor.into());
        }
        let outputs = self.plan.run(feed).map_err(backend)?;
        let view = outputs[0].to_plain_array_view::<f32>().map_err(backend)?;
        let flat: Vec<f32> = view.iter().copied().collect();
        if flat.len() != length * NUM_CLASSES {
            return Err(ScorerError::Backend(format!("unexpected output size {}", flat.len())));
        }
        let start = special.prefix.len();
        Ok(flat
            .chunks_exact(NUM_CLASSES)
            .skip(start)
            .take(content.len())
            .map(|row| {
                let row: [f32; NUM_CLASSES] = row.try_into().expect("exact chunk");
                match self.metadata.output {
                    GraphOutput::Logits => softmax(&row),
                    GraphOutput::Probabilities => row,
                }
            })
            .collect())
    }
}

impl<T: Probability> Scorer<T> for OnnxScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn subtokenizer(&self) -> &dyn Subtokenizer {
        &self.tokenizer
    }

    fn max_input_length(&self) -> Option<usize> {
        Some(self.metadata.max_input_length)
    }

    fn score_chunk(&self, input: ChunkInput<'_>) -> Result<ChunkScores<T>, ScorerError> {
        let rows = self
            .run(input.chunk.subtoken_ids())?
            .into_iter()
            .map(|row| row.map(|p| p.cast::<T>()))
            .collect();
        ChunkScores::new(rows, input.chunk.len())
    }
}
