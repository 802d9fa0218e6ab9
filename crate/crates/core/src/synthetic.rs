//! Seeded synthetic corpora whose words determine their class, for exercising
//! the pipeline with rule-based scorers.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Document, Split};
use crate::label::{LabelId, NUM_CLASSES};

const CLASS_PREFIX: [&str; NUM_CLASSES] = ["hu", "sy", "ge", "su"];

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    /// Word to gold class; every word in the corpus is a key.
    pub rule: HashMap<String, LabelId>,
}

/// Documents of `min_words..=max_words` words made of 1 to 5 labelled
/// segments, each drawn from a class-specific vocabulary.
pub fn synthetic_corpus(documents: usize, min_words: usize, max_words: usize, seed: u64) -> SyntheticCorpus {
    assert!(min_words >= 1 && min_words <= max_words);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rule = HashMap::new();
    let mut docs = Vec::with_capacity(documents);
    for d in 0..documents {
        let n = rng.random_range(min_words..=max_words);
        let segments = rng.random_range(1..=5usize.min(n));
        let mut cuts: Vec<usize> = (0..segments - 1).map(|_| rng.random_range(1..n)).collect();
        cuts.push(n);
        cuts.sort_unstable();
        let mut words = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut class = rng.random_range(0..NUM_CLASSES);
        for &end in &cuts {
            while words.len() < end {
                let stem = rng.random_range(0..500u32);
                let tail = rng.random_range(0..9usize);
                let word = format!("{}{}{}", CLASS_PREFIX[class], stem, "q".repeat(tail));
                rule.insert(word.clone(), LabelId::from_index(class));
                words.push(word);
                labels.push(LabelId::from_index(class));
            }
            class = (class + rng.random_range(1..NUM_CLASSES)) % NUM_CLASSES;
        }
        docs.push(Document::from_words(format!("syn-{d:05}"), words, Some(labels)).expect("non-empty words"));
    }
    let dataset = Dataset::new(Split::Test, docs).expect("unique ids");
    SyntheticCorpus { dataset, rule }
}
