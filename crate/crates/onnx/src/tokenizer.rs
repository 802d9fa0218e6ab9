use std::path::Path;

use mgtd_core::alignment::{Subtokenizer, SubtokenizerError};
use tokenizers::Tokenizer;

use crate::LoadError;

/// A serialized `tokenizer.json` definition applied one word at a time,
/// without special tokens.
pub struct HfSubtokenizer {
    inner: Tokenizer,
    overhead: usize,
    unk: Option<u32>,
}

impl HfSubtokenizer {
    pub fn from_file(path: &Path, overhead: usize, unk: Option<u32>) -> Result<Self, LoadError> {
        let inner = Tokenizer::from_file(path)
            .map_err(|e| LoadError::Tokenizer(format!("{}: {e}", path.display())))?;
        Ok(HfSubtokenizer { inner, overhead, unk })
    }
}

impl Subtokenizer for HfSubtokenizer {
    fn vocab_size(&self) -> usize {
        self.inner.get_vocab_size(true)
    }

    fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError> {
        let encoding = self.inner.encode(word, false).map_err(|e| SubtokenizerError(e.to_string()))?;
        let ids = encoding.get_ids();
        match (ids.is_empty(), self.unk) {
            (true, Some(unk)) => Ok(vec![unk]),
            _ => Ok(ids.to_vec()),
        }
    }

    fn special_token_overhead(&self) -> usize {
        self.overhead
    }
}
