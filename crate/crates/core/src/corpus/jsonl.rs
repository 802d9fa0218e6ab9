use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{tabular, CorpusError, Dataset, Document, Split};
use crate::label::LabelId;

/// Input formats understood by [`parse_dataset`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Native format: one `{"id","text","tokens","labels"}` object per line.
    JsonLines,
    /// Comma-separated export of the competition release.
    Csv,
    /// Tab-separated export of the competition release.
    Tsv,
}

impl FromStr for DatasetFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "jsonlines" => Ok(DatasetFormat::JsonLines),
            "csv" => Ok(DatasetFormat::Csv),
            "tsv" => Ok(DatasetFormat::Tsv),
            other => Err(CorpusError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn parse_dataset<R: BufRead>(source: R, format: DatasetFormat, split: Split) -> Result<Dataset, CorpusError> {
    let documents = match format {
        DatasetFormat::JsonLines => parse_jsonl(source)?,
        DatasetFormat::Csv => tabular::parse_tabular(source, b',')?,
        DatasetFormat::Tsv => tabular::parse_tabular(source, b'\t')?,
    };
    into_dataset(split, documents)
}

/// Documents paired with the 1-based source line (or row) they came from.
pub(crate) fn into_dataset(split: Split, documents: Vec<(usize, Document)>) -> Result<Dataset, CorpusError> {
    let lines: Vec<usize> = documents.iter().map(|(l, _)| *l).collect();
    let documents = documents.into_iter().map(|(_, d)| d).collect();
    Dataset::new(split, documents).map_err(|(i, doc_id)| CorpusError::DuplicateId { line: lines[i], doc_id })
}

/// Parses native JSON-lines records. Blank lines are skipped.
pub fn parse_jsonl<R: BufRead>(source: R) -> Result<Vec<(usize, Document)>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| CorpusError::malformed(line_no, "<record>", e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(CorpusError::malformed(line_no, "<record>", "expected a JSON object"));
        };
        out.push((line_no, record_to_document(line_no, &obj)?));
    }
    Ok(out)
}

fn record_to_document(line: usize, obj: &Map<String, Value>) -> Result<Document, CorpusError> {
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(CorpusError::malformed(line, "id", "expected a string")),
        None => return Err(CorpusError::malformed(line, "id", "missing")),
    };
    let tokens = match obj.get("tokens") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, v)| match v {
                Value::String(s) => Ok(s.clone()),
                _ => Err(CorpusError::malformed(line, "tokens", format!("item {k} is not a string"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(CorpusError::malformed(line, "tokens", "expected an array of strings")),
        None => return Err(CorpusError::malformed(line, "tokens", "missing")),
    };
    let text = match obj.get("text") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(CorpusError::malformed(line, "text", "expected a string")),
        None => return Err(CorpusError::malformed(line, "text", "missing")),
    };
    let labels = match obj.get("labels") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let raw = v
                        .as_i64()
                        .ok_or_else(|| CorpusError::malformed(line, "labels", format!("item {k} is not an integer")))?;
                    LabelId::new(raw).map_err(|source| CorpusError::UnknownLabel { line, source })
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Some(_) => return Err(CorpusError::malformed(line, "labels", "expected an array of integers")),
    };
    Document::new(id.clone(), text, tokens, labels).map_err(|e| CorpusError::from_document(line, &id, e))
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    text: &'a str,
    tokens: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [LabelId]>,
}

/// Writes documents in the native format with fixed field order.
pub fn write_jsonl<'a, W: Write>(
    mut out: W,
    documents: impl IntoIterator<Item = &'a Document>,
) -> std::io::Result<()> {
    for doc in documents {
        let record = RecordOut { id: doc.id(), text: doc.text(), tokens: doc.words(), labels: doc.labels() };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<Dataset, CorpusError> {
        parse_dataset(src.as_bytes(), DatasetFormat::JsonLines, Split::Train)
    }

    #[test]
    fn minimal_record() {
        let ds = parse(r#"{"id":"d1","text":"a b","tokens":["a","b"],"labels":[0,1]}"#).unwrap();
        assert_eq!(ds.len(), 1);
        let doc = &ds.documents()[0];
        assert_eq!(doc.id(), "d1");
        assert_eq!(doc.labels().unwrap(), [LabelId::HUMAN, LabelId::SYNONYM_REPLACED]);
    }

    #[test]
    fn length_mismatch() {
        let err = parse(r#"{"id":"d1","text":"a b c","tokens":["a","b","c"],"labels":[0,1]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::LengthMismatch { line: 1, tokens: 3, labels: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_label() {
        let err = parse(r#"{"id":"d1","text":"a b","tokens":["a","b"],"labels":[0,7]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownLabel { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_reports_line_and_field() {
        let src = "{\"id\":\"ok\",\"text\":\"a\",\"tokens\":[\"a\"]}\n{\"id\":\"d2\",\"text\":\"a\",\"tokens\":\"a\"}\n";
        match parse(src).unwrap_err() {
            CorpusError::MalformedRecord { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "tokens");
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(parse("not json").unwrap_err(), CorpusError::MalformedRecord { line: 1, .. }));
        assert!(matches!(
            parse(r#"{"text":"a","tokens":["a"]}"#).unwrap_err(),
            CorpusError::MalformedRecord { ref field, .. } if field == "id"
        ));
    }

    #[test]
    fn empty_document_rejected() {
        let err = parse(r#"{"id":"e","text":"","tokens":[]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyDocument { line: 1, .. }));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = "{\"id\":\"x\",\"text\":\"a\",\"tokens\":[\"a\"]}\n\n{\"id\":\"x\",\"text\":\"b\",\"tokens\":[\"b\"]}\n";
        assert!(matches!(parse(src).unwrap_err(), CorpusError::DuplicateId { line: 3, .. }));
    }

    #[test]
    fn reserialize_is_byte_stable() {
        let src = "{\"id\":\"d1\",\"text\":\"a  b\",\"tokens\":[\"a\",\"b\"],\"labels\":[0,1]}\n\
                   {\"id\":\"d2\",\"text\":\"\\\"q\\\" é\",\"tokens\":[\"\\\"q\\\"\",\"é\"]}\n";
        let ds = parse(src).unwrap();
        let mut out = Vec::new();
        write_jsonl(&mut out, ds.documents()).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), src);
    }
}
