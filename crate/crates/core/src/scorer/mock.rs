//! Deterministic rule-driven scorer for tests and pipeline checks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChunkInput, ChunkScores, Scorer, ScorerError};
use crate::alignment::{Subtokenizer, SubtokenizerError};
use crate::distribution::one_hot;
use crate::label::{LabelId, NUM_CLASSES};
use crate::scalar::Probability;

const MOCK_VOCAB: u64 = 32_000;
const MOCK_SPECIALS: u64 = 3;

/// Splits each word into fixed-width character pieces and hashes them.
#[derive(Clone, Debug)]
pub struct MockSubtokenizer {
    chars_per_piece: usize,
    overhead: usize,
}

impl MockSubtokenizer {
    pub fn new(chars_per_piece: usize, overhead: usize) -> Self {
        assert!(chars_per_piece > 0);
        MockSubtokenizer { chars_per_piece, overhead }
    }
}

impl Default for MockSubtokenizer {
    fn default() -> Self {
        MockSubtokenizer::new(4, 2)
    }
}

impl Subtokenizer for MockSubtokenizer {
    fn vocab_size(&self) -> usize {
        MOCK_VOCAB as usize
    }

    fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError> {
        let chars: Vec<char> = word.chars().collect();
        Ok(chars
            .chunks(self.chars_per_piece)
            .map(|piece| {
                let piece: String = piece.iter().collect();
                (MOCK_SPECIALS + fnv1a(piece.as_bytes()) % (MOCK_VOCAB - MOCK_SPECIALS)) as u32
            })
            .collect())
    }

    fn special_token_overhead(&self) -> usize {
        self.overhead
    }
}

/// Emits the one-hot row of `rule[word]` for every subtoken of a word, and
/// with probability `noise_rate` a uniformly drawn wrong label instead.
///
/// The noise decision depends only on `(seed, document id, word index)`, so
/// output is independent of how the document is chunked.
#[derive(Clone, Debug)]
pub struct MockScorer {
    id: String,
    rule: HashMap<String, LabelId>,
    noise_rate: f64,
    seed: u64,
    tokenizer: MockSubtokenizer,
}

pub fn mock_scorer(rule: HashMap<String, LabelId>, noise_rate: f64, seed: u64) -> Result<MockScorer, ScorerError> {
    MockScorer::new("mock", rule, noise_rate, seed)
}

impl MockScorer {
    pub fn new(
        id: impl Into<String>,
        rule: HashMap<String, LabelId>,
        noise_rate: f64,
        seed: u64,
    ) -> Result<Self, ScorerError> {
        if !(0.0..1.0).contains(&noise_rate) {
            return Err(ScorerError::InvalidNoiseRate(noise_rate));
        }
        Ok(MockScorer { id: id.into(), rule, noise_rate, seed, tokenizer: MockSubtokenizer::default() })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_subtokenizer(mut self, tokenizer: MockSubtokenizer) -> Self {
        self.tokenizer = tokenizer;
        self
    }

    /// Word-level label the scorer emits, noise included.
    pub fn word_label(&self, doc_id: &str, word_index: usize, word: &str) -> LabelId {
        let clean = self.rule.get(word).copied().unwrap_or(LabelId::HUMAN);
        if self.noise_rate == 0.0 {
            return clean;
        }
        let key = splitmix64(self.seed ^ splitmix64(fnv1a(doc_id.as_bytes()) ^ splitmix64(word_index as u64)));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        if rng.random_bool(self.noise_rate) {
            let offset = rng.random_range(1..NUM_CLASSES);
            LabelId::from_index((clean.index() + offset) % NUM_CLASSES)
        } else {
            clean
        }
    }
}

impl<T: Probability> Scorer<T> for MockScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn subtokenizer(&self) -> &dyn Subtokenizer {
        &self.tokenizer
    }

    fn score_chunk(&self, input: ChunkInput<'_>) -> Result<ChunkScores<T>, ScorerError> {
        let rows = input
            .chunk
            .word_index()
            .iter()
            .map(|&w| one_hot(self.word_label(input.doc_id, w, &input.words[w])))
            .collect();
        ChunkScores::new(rows, input.chunk.len())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
