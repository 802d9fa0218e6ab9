//! Token-level detection of machine-generated text in scientific documents.
//!
//! The pipeline splits a document into whitespace words, maps them to encoder
//! subtokens, cuts the subtoken sequence into model-sized chunks, scores each
//! chunk with a per-subtoken classifier, folds subtoken rows back into word
//! labels, votes across models, and scores the result with macro-F1.
//!
//! Numeric code is generic over the scalar type: probabilities over
//! [`Probability`] (`f32`/`f64`) and metrics over [`Scalar`], which includes
//! exact rationals. Concrete aliases are exported below.

pub mod alignment;
pub mod corpus;
pub mod distribution;
pub mod ensemble;
pub mod evaluation;
pub mod label;
pub mod prediction;
pub mod scalar;
pub mod scorer;
pub mod synthetic;

pub use alignment::{Aggregation, Chunk, Subtokenizer, SubtokenAlignment};
pub use corpus::{Dataset, Document, SpanAnnotation, Split};
pub use distribution::Distribution;
pub use ensemble::{EnsembleConfig, TiePolicy};
pub use evaluation::{ClassPolicy, ConfusionMatrix, EvalReport};
pub use label::{LabelId, LabelMap, NUM_CLASSES};
pub use prediction::PredictionRecord;
pub use scalar::{Probability, Scalar};
pub use scorer::{ChunkScores, DocumentPrediction, ModelPreset, Scorer};

/// Exact rational used for reference metric values.
pub type ExactRatio = num_rational::Ratio<i128>;

pub type EvalReportF64 = EvalReport<f64>;
pub type EvalReportF32 = EvalReport<f32>;
pub type ExactEvalReport = EvalReport<ExactRatio>;

pub type ChunkScoresF32 = ChunkScores<f32>;
pub type ChunkScoresF64 = ChunkScores<f64>;

pub type DocumentPredictionF32 = DocumentPrediction<f32>;
pub type DocumentPredictionF64 = DocumentPrediction<f64>;
