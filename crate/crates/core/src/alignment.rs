//! Word to subtoken alignment, subtoken-budget chunking, label projection and
//! the aggregation of subtoken predictions back to words.

use std::ops::Range;

use crate::distribution::{is_distribution, Distribution};
use crate::label::{LabelId, NUM_CLASSES};
use crate::scalar::Probability;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("subtokenizer: {0}")]
pub struct SubtokenizerError(pub String);

/// Maps a single whitespace word to encoder vocabulary ids.
pub trait Subtokenizer {
    fn vocab_size(&self) -> usize;

    /// Must be deterministic and return at least one id for a non-empty word.
    fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError>;

    /// Positions per chunk taken by special tokens (sequence start/end markers).
    fn special_token_overhead(&self) -> usize;
}

impl<S: Subtokenizer + ?Sized> Subtokenizer for &S {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError> {
        (**self).encode(word)
    }

    fn special_token_overhead(&self) -> usize {
        (**self).special_token_overhead()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignError {
    #[error("document has no words")]
    EmptyDocument,
    #[error("subtokenizer returned no ids for word {word_index}")]
    EmptyEncoding { word_index: usize },
    #[error(transparent)]
    Subtokenizer(#[from] SubtokenizerError),
    #[error("chunk budget of {max_subtokens} with {overhead} special positions leaves no room for content")]
    InvalidBudget { max_subtokens: usize, overhead: usize },
    #[error("expected {expected} items, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("row {row} is not a probability distribution")]
    MalformedDistribution { row: usize },
    #[error("invalid alignment: {0}")]
    InvalidAlignment(String),
}

/// Subtoken sequence of a document plus the source word of each subtoken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtokenAlignment {
    subtoken_ids: Vec<u32>,
    word_index: Vec<usize>,
    word_count: usize,
}

impl SubtokenAlignment {
    /// Validates that `word_index` is non-decreasing, starts at 0, ends at
    /// `word_count - 1` and skips no word.
    pub fn from_parts(subtoken_ids: Vec<u32>, word_index: Vec<usize>, word_count: usize) -> Result<Self, AlignError> {
        if subtoken_ids.len() != word_index.len() {
            return Err(AlignError::LengthMismatch { expected: word_index.len(), got: subtoken_ids.len() });
        }
        if word_count == 0 || word_index.is_empty() {
            return Err(AlignError::EmptyDocument);
        }
        if word_index[0] != 0 || *word_index.last().unwrap() != word_count - 1 {
            return Err(AlignError::InvalidAlignment("word_index must span 0..word_count".into()));
        }
        if let Some(i) = word_index.windows(2).position(|w| w[1] != w[0] && w[1] != w[0] + 1) {
            return Err(AlignError::InvalidAlignment(format!("word_index jumps at subtoken {}", i + 1)));
        }
        Ok(SubtokenAlignment { subtoken_ids, word_index, word_count })
    }

    pub fn subtoken_ids(&self) -> &[u32] {
        &self.subtoken_ids
    }

    pub fn word_index(&self) -> &[usize] {
        &self.word_index
    }

    pub fn word_count(&self) -> usize {
        self.word_count
    }

    pub fn len(&self) -> usize {
        self.subtoken_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtoken_ids.is_empty()
    }

    /// Subtoken range of every word, in word order.
    pub fn word_ranges(&self) -> Vec<Range<usize>> {
        let mut ranges = Vec::with_capacity(self.word_count);
        let mut start = 0;
        for i in 1..=self.word_index.len() {
            if i == self.word_index.len() || self.word_index[i] != self.word_index[start] {
                ranges.push(start..i);
                start = i;
            }
        }
        ranges
    }
}

/// A model-sized slice of a document's subtokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk {
    subtoken_ids: Vec<u32>,
    word_index: Vec<usize>,
    word_span: (usize, usize),
    truncated_word: Option<usize>,
}

impl Chunk {
    /// Content subtoken ids, without special tokens.
    pub fn subtoken_ids(&self) -> &[u32] {
        &self.subtoken_ids
    }

    /// Document-level word index of each content subtoken.
    pub fn word_index(&self) -> &[usize] {
        &self.word_index
    }

    /// First and last (inclusive) document word covered.
    pub fn word_span(&self) -> (usize, usize) {
        self.word_span
    }

    pub fn words(&self) -> Range<usize> {
        self.word_span.0..self.word_span.1 + 1
    }

    /// Set when a single word exceeded the capacity and was cut.
    pub fn truncated_word(&self) -> Option<usize> {
        self.truncated_word
    }

    pub fn len(&self) -> usize {
        self.subtoken_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtoken_ids.is_empty()
    }
}

pub fn align<S, W>(words: &[W], tok: &S) -> Result<SubtokenAlignment, AlignError>
where
    S: Subtokenizer + ?Sized,
    W: AsRef<str>,
{
    if words.is_empty() {
        return Err(AlignError::EmptyDocument);
    }
    let mut subtoken_ids = Vec::with_capacity(words.len() * 2);
    let mut word_index = Vec::with_capacity(words.len() * 2);
    for (i, word) in words.iter().enumerate() {
        let ids = tok.encode(word.as_ref())?;
        if ids.is_empty() {
            return Err(AlignError::EmptyEncoding { word_index: i });
        }
        word_index.extend(std::iter::repeat_n(i, ids.len()));
        subtoken_ids.extend(ids);
    }
    Ok(SubtokenAlignment { subtoken_ids, word_index, word_count: words.len() })
}

/// Greedy left-to-right chunking with `max_subtokens - overhead` content
/// positions per chunk.
///
/// Words are never split across chunks. A word longer than the capacity gets
/// a chunk of its own holding its first `capacity` subtokens.
pub fn chunk_alignment(a: &SubtokenAlignment, max_subtokens: usize, overhead: usize) -> Result<Vec<Chunk>, AlignError> {
    let capacity = max_subtokens.saturating_sub(overhead);
    if capacity < 1 {
        return Err(AlignError::InvalidBudget { max_subtokens, overhead });
    }
    let mut chunks = Vec::new();
    let mut open: Option<(usize, Range<usize>)> = None; // (first word, subtoken range)
    let close = |first: usize, range: Range<usize>, chunks: &mut Vec<Chunk>| {
        let last = a.word_index[range.end - 1];
        chunks.push(Chunk {
            subtoken_ids: a.subtoken_ids[range.clone()].to_vec(),
            word_index: a.word_index[range].to_vec(),
            word_span: (first, last),
            truncated_word: None,
        });
    };

    for (word, range) in a.word_ranges().into_iter().enumerate() {
        if range.len() > capacity {
            if let Some((first, r)) = open.take() {
                close(first, r, &mut chunks);
            }
            let cut = range.start..range.start + capacity;
            chunks.push(Chunk {
                subtoken_ids: a.subtoken_ids[cut.clone()].to_vec(),
                word_index: a.word_index[cut].to_vec(),
                word_span: (word, word),
                truncated_word: Some(word),
            });
            continue;
        }
        match &mut open {
            Some((_, r)) if r.len() + range.len() <= capacity => r.end = range.end,
            _ => {
                if let Some((first, r)) = open.take() {
                    close(first, r, &mut chunks);
                }
                open = Some((word, range));
            }
        }
    }
    if let Some((first, r)) = open {
        close(first, r, &mut chunks);
    }
    Ok(chunks)
}

/// Gives every subtoken the label of its source word.
pub fn project_word_labels(labels: &[LabelId], a: &SubtokenAlignment) -> Result<Vec<LabelId>, AlignError> {
    if labels.len() != a.word_count {
        return Err(AlignError::LengthMismatch { expected: a.word_count, got: labels.len() });
    }
    Ok(a.word_index.iter().map(|&w| labels[w]).collect())
}

/// How subtoken rows of one word are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Renormalised arithmetic mean of all subtoken rows.
    #[default]
    Mean,
    /// Row of the word's first subtoken.
    First,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "first" => Ok(Aggregation::First),
            other => Err(format!("unknown aggregation strategy {other:?} (expected mean or first)")),
        }
    }
}

pub fn aggregate_to_words<T: Probability>(
    scores: &[Distribution<T>],
    a: &SubtokenAlignment,
    strategy: Aggregation,
) -> Result<Vec<Distribution<T>>, AlignError> {
    if scores.len() != a.len() {
        return Err(AlignError::LengthMismatch { expected: a.len(), got: scores.len() });
    }
    if let Some(row) = scores.iter().position(|r| !is_distribution(r)) {
        return Err(AlignError::MalformedDistribution { row });
    }
    let words = a
        .word_ranges()
        .into_iter()
        .map(|range| match strategy {
            Aggregation::First => scores[range.start],
            Aggregation::Mean => {
                let mut acc = [T::zero(); NUM_CLASSES];
                for row in &scores[range] {
                    for (a, &p) in acc.iter_mut().zip(row) {
                        *a = *a + p;
                    }
                }
                let total = acc.iter().fold(T::zero(), |s, &p| s + p);
                acc.map(|p| p / total)
            }
        })
        .collect();
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{argmax, one_hot};
    use proptest::prelude::*;

    /// Subtokenizer whose word `"<n>"` encodes to `n` subtokens.
    struct Counted;

    impl Subtokenizer for Counted {
        fn vocab_size(&self) -> usize {
            100
        }

        fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError> {
            let n: u32 = word.parse().map_err(|_| SubtokenizerError(word.into()))?;
            Ok((0..n).collect())
        }

        fn special_token_overhead(&self) -> usize {
            2
        }
    }

    fn aligned(counts: &[usize]) -> SubtokenAlignment {
        let words: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
        align(&words, &Counted).unwrap()
    }

    fn ids(raw: &[usize]) -> Vec<LabelId> {
        raw.iter().map(|&v| LabelId::from_index(v)).collect()
    }

    #[test]
    fn align_examples() {
        assert_eq!(aligned(&[4, 3]).word_index(), [0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(aligned(&[1]).word_index(), [0]);
        assert_eq!(aligned(&[1, 1, 1]).word_index(), [0, 1, 2]);
        assert_eq!(align::<_, String>(&[], &Counted), Err(AlignError::EmptyDocument));
        assert_eq!(
            align(&["1".to_string(), "0".to_string()], &Counted),
            Err(AlignError::EmptyEncoding { word_index: 1 })
        );
    }

    #[test]
    fn from_parts_validation() {
        assert!(SubtokenAlignment::from_parts(vec![1, 2, 3], vec![0, 0, 1], 2).is_ok());
        assert!(SubtokenAlignment::from_parts(vec![1, 2], vec![0, 2], 3).is_err());
        assert!(SubtokenAlignment::from_parts(vec![1, 2], vec![1, 1], 2).is_err());
        assert!(SubtokenAlignment::from_parts(vec![1, 2], vec![0, 0], 2).is_err());
        assert!(SubtokenAlignment::from_parts(vec![1], vec![0, 0], 1).is_err());
    }

    #[test]
    fn chunk_examples() {
        // capacity 6: 3 + 4 > 6 closes after word 0, then 4 + 2 = 6 fits
        let chunks = chunk_alignment(&aligned(&[3, 4, 2]), 8, 2).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].word_span(), (0, 0));
        assert_eq!(chunks[1].word_span(), (1, 2));
        assert_eq!(chunks[1].len(), 6);

        let one = chunk_alignment(&aligned(&[3, 4, 2]), 11, 2).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].word_span(), (0, 2));

        let cut = chunk_alignment(&aligned(&[9]), 8, 2).unwrap();
        assert_eq!(cut.len(), 1);
        assert_eq!(cut[0].len(), 6);
        assert_eq!(cut[0].truncated_word(), Some(0));

        assert_eq!(
            chunk_alignment(&aligned(&[1]), 2, 2),
            Err(AlignError::InvalidBudget { max_subtokens: 2, overhead: 2 })
        );
    }

    #[test]
    fn oversize_word_in_the_middle() {
        let chunks = chunk_alignment(&aligned(&[2, 9, 1, 1]), 6, 0).unwrap();
        let spans: Vec<_> = chunks.iter().map(|c| (c.word_span(), c.truncated_word())).collect();
        assert_eq!(spans, [((0, 0), None), ((1, 1), Some(1)), ((2, 3), None)]);
    }

    #[test]
    fn projection_examples() {
        let a = SubtokenAlignment::from_parts(vec![5, 6, 7], vec![0, 0, 1], 2).unwrap();
        assert_eq!(project_word_labels(&ids(&[1, 0]), &a).unwrap(), ids(&[1, 1, 0]));
        let b = SubtokenAlignment::from_parts(vec![5, 6, 7, 8], vec![0, 1, 1, 2], 3).unwrap();
        assert_eq!(project_word_labels(&ids(&[0, 1, 2]), &b).unwrap(), ids(&[0, 1, 1, 2]));
        assert_eq!(project_word_labels(&ids(&[3, 3]), &a).unwrap(), ids(&[3, 3, 3]));
        assert_eq!(
            project_word_labels(&ids(&[0]), &a),
            Err(AlignError::LengthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn aggregation_examples() {
        let single = SubtokenAlignment::from_parts(vec![1], vec![0], 1).unwrap();
        let row = [0.1f64, 0.2, 0.3, 0.4];
        assert_eq!(aggregate_to_words(&[row], &single, Aggregation::Mean).unwrap(), [row]);

        let two = SubtokenAlignment::from_parts(vec![1, 2], vec![0, 0], 1).unwrap();
        let rows = [[1.0f64, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        assert_eq!(aggregate_to_words(&rows, &two, Aggregation::Mean).unwrap(), [[0.5, 0.5, 0.0, 0.0]]);
        assert_eq!(aggregate_to_words(&rows, &two, Aggregation::First).unwrap(), [[1.0, 0.0, 0.0, 0.0]]);

        assert_eq!(
            aggregate_to_words(&rows[..1], &two, Aggregation::Mean),
            Err(AlignError::LengthMismatch { expected: 2, got: 1 })
        );
        let bad = [[1.0f64, 0.0, 0.0, 0.0], [0.3, 0.3, 0.0, 0.0]];
        assert_eq!(
            aggregate_to_words(&bad, &two, Aggregation::Mean),
            Err(AlignError::MalformedDistribution { row: 1 })
        );
    }

    fn arb_counts() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..12, 1..60)
    }

    proptest! {
        #[test]
        fn chunks_partition_words(counts in arb_counts(), capacity in 1usize..40) {
            let a = aligned(&counts);
            let chunks = chunk_alignment(&a, capacity + 2, 2).unwrap();
            let mut next = 0;
            for chunk in &chunks {
                prop_assert_eq!(chunk.word_span().0, next);
                prop_assert!(chunk.len() <= capacity);
                next = chunk.word_span().1 + 1;
            }
            prop_assert_eq!(next, counts.len());
        }

        #[test]
        fn projection_then_aggregation_recovers_labels(
            counts in arb_counts(),
            seed in prop::collection::vec(0usize..4, 60),
        ) {
            let a = aligned(&counts);
            let labels = ids(&seed[..counts.len()]);
            let rows: Vec<[f64; 4]> = project_word_labels(&labels, &a).unwrap().into_iter().map(one_hot).collect();
            for strategy in [Aggregation::Mean, Aggregation::First] {
                let words = aggregate_to_words(&rows, &a, strategy).unwrap();
                let back: Vec<LabelId> = words.iter().map(argmax).collect();
                prop_assert_eq!(&back, &labels);
            }
        }
    }
}
