//! Token-labeled documents: the data model, ingestion and span views.

mod jsonl;
mod spans;
mod tabular;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::label::LabelId;

pub use jsonl::{parse_dataset, parse_jsonl, write_jsonl, DatasetFormat};
pub use spans::{labels_to_spans, spans_to_labels, SpanAnnotation, SpanError};
pub use tabular::parse_python_list;

/// Splits on runs of Unicode whitespace. Never yields empty words.
pub fn whitespace_tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("document has no words")]
    Empty,
    #[error("word {index} is empty or contains whitespace")]
    BadWord { index: usize },
    #[error("text does not match tokens after whitespace normalisation (first difference at word {index})")]
    TextMismatch { index: usize },
    #[error("{words} tokens but {labels} labels")]
    LengthMismatch { words: usize, labels: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record, field `{field}`: {reason}")]
    MalformedRecord { line: usize, field: String, reason: String },
    #[error("line {line}: document {doc_id:?} has {tokens} tokens but {labels} labels")]
    LengthMismatch { line: usize, doc_id: String, tokens: usize, labels: usize },
    #[error("line {line}: {source}")]
    UnknownLabel { line: usize, source: crate::label::UnknownLabel },
    #[error("line {line}: document {doc_id:?} is empty")]
    EmptyDocument { line: usize, doc_id: String },
    #[error("line {line}: duplicate document id {doc_id:?}")]
    DuplicateId { line: usize, doc_id: String },
    #[error("unsupported input format {0:?}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    pub(crate) fn malformed(line: usize, field: &str, reason: impl Into<String>) -> Self {
        CorpusError::MalformedRecord { line, field: field.to_string(), reason: reason.into() }
    }

    pub(crate) fn from_document(line: usize, doc_id: &str, err: DocumentError) -> Self {
        match err {
            DocumentError::Empty => CorpusError::EmptyDocument { line, doc_id: doc_id.to_string() },
            DocumentError::BadWord { index } => {
                CorpusError::malformed(line, "tokens", format!("word {index} is empty or contains whitespace"))
            }
            DocumentError::TextMismatch { index } => CorpusError::malformed(
                line,
                "text",
                format!("does not match tokens (first difference at word {index})"),
            ),
            DocumentError::LengthMismatch { words, labels } => CorpusError::LengthMismatch {
                line,
                doc_id: doc_id.to_string(),
                tokens: words,
                labels,
            },
        }
    }
}

/// One scientific text with its whitespace words and optional gold labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    id: String,
    text: String,
    words: Vec<String>,
    labels: Option<Vec<LabelId>>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        words: Vec<String>,
        labels: Option<Vec<LabelId>>,
    ) -> Result<Self, DocumentError> {
        let text = text.into();
        if words.is_empty() {
            return Err(DocumentError::Empty);
        }
        if let Some(index) = words.iter().position(|w| w.is_empty() || w.chars().any(char::is_whitespace)) {
            return Err(DocumentError::BadWord { index });
        }
        let mut from_text = text.split_whitespace();
        for (index, word) in words.iter().enumerate() {
            if from_text.next() != Some(word.as_str()) {
                return Err(DocumentError::TextMismatch { index });
            }
        }
        if from_text.next().is_some() {
            return Err(DocumentError::TextMismatch { index: words.len() });
        }
        if let Some(labels) = &labels {
            if labels.len() != words.len() {
                return Err(DocumentError::LengthMismatch { words: words.len(), labels: labels.len() });
            }
        }
        Ok(Document { id: id.into(), text, words, labels })
    }

    /// Tokenizes `text` on whitespace to obtain the words.
    pub fn from_text(
        id: impl Into<String>,
        text: impl Into<String>,
        labels: Option<Vec<LabelId>>,
    ) -> Result<Self, DocumentError> {
        let text = text.into();
        let words = whitespace_tokenize(&text);
        Document::new(id, text, words, labels)
    }

    /// Builds a document whose text is the words joined by single spaces.
    pub fn from_words(
        id: impl Into<String>,
        words: Vec<String>,
        labels: Option<Vec<LabelId>>,
    ) -> Result<Self, DocumentError> {
        let text = words.join(" ");
        Document::new(id, text, words, labels)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn labels(&self) -> Option<&[LabelId]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words joined by single spaces.
    pub fn normalized_text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    #[default]
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "val" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    split: Split,
    documents: Vec<Document>,
}

impl Dataset {
    /// Fails with the index of the first repeated id.
    pub fn new(split: Split, documents: Vec<Document>) -> Result<Self, (usize, String)> {
        let mut seen = HashSet::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id()) {
                return Err((i, doc.id().to_string()));
            }
        }
        Ok(Dataset { split, documents })
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id() == id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}
