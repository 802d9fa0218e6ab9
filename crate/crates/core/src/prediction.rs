//! JSON-lines interchange format for model predictions.
//!
//! One record per document: `{"doc_id", "labels", "distributions"?, "tallies"?}`.
//! Files are keyed by `doc_id` so that runs of different models can be voted
//! on without re-running them.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::distribution::{is_distribution, Distribution};
use crate::label::{LabelId, NUM_CLASSES};
use crate::scalar::Probability;
use crate::scorer::DocumentPrediction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub doc_id: String,
    pub labels: Vec<LabelId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<Distribution<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tallies: Option<Vec<[u32; NUM_CLASSES]>>,
}

#[derive(Debug, thiserror::Error)]
pub enum PredictionFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate doc_id {doc_id:?}")]
    DuplicateDoc { line: usize, doc_id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PredictionRecord {
    pub fn from_prediction<T: Probability>(pred: &DocumentPrediction<T>, with_distributions: bool) -> Self {
        PredictionRecord {
            doc_id: pred.doc_id.clone(),
            labels: pred.labels.clone(),
            distributions: with_distributions
                .then(|| pred.distributions.iter().map(|row| row.map(|p| p.cast::<f64>())).collect()),
            tallies: None,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(d) = &self.distributions {
            if d.len() != self.labels.len() {
                return Err(format!("{} distributions for {} labels", d.len(), self.labels.len()));
            }
            if let Some(row) = d.iter().position(|r| !is_distribution(r)) {
                return Err(format!("distribution {row} is not a probability distribution"));
            }
        }
        if let Some(t) = &self.tallies {
            if t.len() != self.labels.len() {
                return Err(format!("{} tallies for {} labels", t.len(), self.labels.len()));
            }
        }
        Ok(())
    }
}

pub fn read_predictions<R: BufRead>(source: R) -> Result<Vec<PredictionRecord>, PredictionFileError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| PredictionFileError::Malformed { line: line_no, message: e.to_string() })?;
        record.validate().map_err(|message| PredictionFileError::Malformed { line: line_no, message })?;
        if !seen.insert(record.doc_id.clone()) {
            return Err(PredictionFileError::DuplicateDoc { line: line_no, doc_id: record.doc_id });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_predictions<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a PredictionRecord>,
) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rec = PredictionRecord {
            doc_id: "d".into(),
            labels: vec![LabelId::HUMAN, LabelId::SYNONYM_REPLACED],
            distributions: Some(vec![[0.7, 0.1, 0.1, 0.1], [0.0, 1.0, 0.0, 0.0]]),
            tallies: None,
        };
        let mut buf = Vec::new();
        write_predictions(&mut buf, [&rec]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"doc_id":"d","labels":[0,1],"distributions""#));
        assert_eq!(read_predictions(buf.as_slice()).unwrap(), [rec]);
    }

    #[test]
    fn rejects_bad_records() {
        let dup = "{\"doc_id\":\"a\",\"labels\":[0]}\n{\"doc_id\":\"a\",\"labels\":[1]}\n";
        assert!(matches!(read_predictions(dup.as_bytes()), Err(PredictionFileError::DuplicateDoc { line: 2, .. })));
        let ragged = r#"{"doc_id":"a","labels":[0,1],"distributions":[[1,0,0,0]]}"#;
        assert!(matches!(read_predictions(ragged.as_bytes()), Err(PredictionFileError::Malformed { line: 1, .. })));
        let unknown = r#"{"doc_id":"a","labels":[5]}"#;
        assert!(read_predictions(unknown.as_bytes()).is_err());
    }
}
