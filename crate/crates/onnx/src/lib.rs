//! Inference backend for exported taggers: a portable ONNX graph with a
//! `tokenizer.json` subtokenizer and a JSON metadata file.
//!
//! An artifact directory looks like
//!
//! ```text
//! model.onnx       graph: input_ids [1, L] (+ attention_mask, token_type_ids) -> [1, L, 4]
//! tokenizer.json   subtokenizer definition
//! metadata.json    preset, max input length L, class count, label map, hashes
//! ```

mod metadata;
mod scorer;
mod tokenizer;

use std::path::PathBuf;

pub use metadata::{ArtifactMetadata, GraphInput, GraphOutput, SpecialTokens, METADATA_FILE, MODEL_FILE, TOKENIZER_FILE};
pub use scorer::{load_artifact_dir, load_serialized_scorer, OnnxScorer};
pub use tokenizer::HfSubtokenizer;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("artifact metadata mismatch: {0}")]
    MetadataMismatch(String),
    #[error("class count mismatch: expected {expected}, artifact has {found}")]
    ClassCountMismatch { expected: usize, found: usize },
    #[error("invalid metadata {path}: {source}")]
    Metadata { path: PathBuf, source: serde_json::Error },
    #[error("tokenizer: {0}")]
    Tokenizer(String),
    #[error("inference graph: {0}")]
    Graph(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
