//! Per-subtoken classifier backends and the single-model document pipeline.

mod mock;
mod preset;

use crate::alignment::{aggregate_to_words, align, chunk_alignment, AlignError, Aggregation, Chunk, Subtokenizer, SubtokenAlignment};
use crate::corpus::Document;
use crate::distribution::{argmax, is_distribution, Distribution};
use crate::label::LabelId;
use crate::scalar::Probability;

pub use mock::{mock_scorer, MockScorer, MockSubtokenizer};
pub use preset::{ModelPreset, FROZEN_LAYERS, INPUT_LENGTHS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error("noise rate {0} is outside [0, 1)")]
    InvalidNoiseRate(f64),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("scorer returned {got} rows for a chunk of {expected} subtokens")]
    RowCount { expected: usize, got: usize },
    #[error("scorer row {row} is not a probability distribution")]
    MalformedDistribution { row: usize },
    #[error("max_subtokens {requested} exceeds the model input length {limit}")]
    InputTooLong { requested: usize, limit: usize },
    #[error("backend failure: {0}")]
    Backend(String),
}

/// Class-probability rows for the content subtokens of one chunk.
#[derive(Clone, Debug, PartialEq)]
pub struct ChunkScores<T> {
    rows: Vec<Distribution<T>>,
}

impl<T: Probability> ChunkScores<T> {
    /// Checks the row count against the chunk length and every row for being
    /// a distribution.
    pub fn new(rows: Vec<Distribution<T>>, chunk_len: usize) -> Result<Self, ScorerError> {
        if rows.len() != chunk_len {
            return Err(ScorerError::RowCount { expected: chunk_len, got: rows.len() });
        }
        if let Some(row) = rows.iter().position(|r| !is_distribution(r)) {
            return Err(ScorerError::MalformedDistribution { row });
        }
        Ok(ChunkScores { rows })
    }

    pub fn rows(&self) -> &[Distribution<T>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Distribution<T>> {
        self.rows
    }
}

/// What a scorer sees for one chunk: the chunk itself plus the document it
/// was cut from.
#[derive(Clone, Copy, Debug)]
pub struct ChunkInput<'a> {
    pub doc_id: &'a str,
    pub words: &'a [String],
    pub chunk: &'a Chunk,
}

/// A per-subtoken classifier with a linear head over four classes.
///
/// Implementations return probabilities, not logits. Scoring must be
/// deterministic for fixed weights and input.
pub trait Scorer<T: Probability> {
    fn id(&self) -> &str;

    fn subtokenizer(&self) -> &dyn Subtokenizer;

    /// Longest sequence (special tokens included) the model accepts.
    fn max_input_length(&self) -> Option<usize> {
        None
    }

    fn score_chunk(&self, input: ChunkInput<'_>) -> Result<ChunkScores<T>, ScorerError>;
}

impl<T: Probability, S: Scorer<T> + ?Sized> Scorer<T> for Box<S> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn subtokenizer(&self) -> &dyn Subtokenizer {
        (**self).subtokenizer()
    }

    fn max_input_length(&self) -> Option<usize> {
        (**self).max_input_length()
    }

    fn score_chunk(&self, input: ChunkInput<'_>) -> Result<ChunkScores<T>, ScorerError> {
        (**self).score_chunk(input)
    }
}

/// Word-level output of one model on one document.
#[derive(Clone, Debug, PartialEq)]
pub struct DocumentPrediction<T> {
    pub doc_id: String,
    pub distributions: Vec<Distribution<T>>,
    pub labels: Vec<LabelId>,
}

/// Align, chunk, score every chunk, then aggregate subtoken rows to words.
///
/// Subtokens dropped from an oversize word do not contribute to its row.
pub fn predict_document<T, S>(
    scorer: &S,
    doc: &Document,
    max_subtokens: usize,
    strategy: Aggregation,
) -> Result<DocumentPrediction<T>, ScorerError>
where
    T: Probability,
    S: Scorer<T> + ?Sized,
{
    if let Some(limit) = scorer.max_input_length() {
        if max_subtokens > limit {
            return Err(ScorerError::InputTooLong { requested: max_subtokens, limit });
        }
    }
    let tok = scorer.subtokenizer();
    let alignment = align(doc.words(), tok)?;
    let chunks = chunk_alignment(&alignment, max_subtokens, tok.special_token_overhead())?;

    let mut rows = Vec::with_capacity(alignment.len());
    let mut ids = Vec::with_capacity(alignment.len());
    let mut word_index = Vec::with_capacity(alignment.len());
    for chunk in &chunks {
        let scores = scorer.score_chunk(ChunkInput { doc_id: doc.id(), words: doc.words(), chunk })?;
        let scores = ChunkScores::new(scores.into_rows(), chunk.len())?;
        rows.extend(scores.into_rows());
        ids.extend_from_slice(chunk.subtoken_ids());
        word_index.extend_from_slice(chunk.word_index());
    }
    let scored = SubtokenAlignment::from_parts(ids, word_index, alignment.word_count())?;
    let distributions = aggregate_to_words(&rows, &scored, strategy)?;
    let labels = distributions.iter().map(argmax).collect();
    Ok(DocumentPrediction { doc_id: doc.id().to_string(), distributions, labels })
}
