//! Converter for tabular exports of the competition release.
//!
//! The release ships one row per document with the token and label lists
//! stored as list literals, either JSON (`["a", "b"]`) or Python repr
//! (`['a', "b's"]`), depending on the tool that wrote the export.

use std::io::BufRead;

use super::{CorpusError, Document};
use crate::label::LabelId;

const ID_COLUMNS: &[&str] = &["id", "index", "doc_id"];
const TEXT_COLUMNS: &[&str] = &["text"];
const TOKEN_COLUMNS: &[&str] = &["tokens"];
const LABEL_COLUMNS: &[&str] = &["token_label_ids", "labels", "token_labels"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ListItem {
    Str(String),
    Int(i64),
}

/// Parses a Python or JSON list literal of strings and integers.
pub fn parse_python_list(src: &str) -> Result<Vec<ListItem>, String> {
    let chars: Vec<char> = src.trim().chars().collect();
    let mut pos = 0;
    let expect = |pos: usize, c: char| -> Result<(), String> {
        match chars.get(pos) {
            Some(&got) if got == c => Ok(()),
            got => Err(format!("expected {c:?} at offset {pos}, found {got:?}")),
        }
    };
    expect(pos, '[')?;
    pos += 1;
    let mut items = Vec::new();
    loop {
        while chars.get(pos).is_some_and(|c| c.is_whitespace()) {
            pos += 1;
        }
        match chars.get(pos) {
            None => return Err("unterminated list".into()),
            Some(']') => {
                pos += 1;
                break;
            }
            Some(&q @ ('\'' | '"')) => {
                pos += 1;
                let mut s = String::new();
                loop {
                    match chars.get(pos) {
                        None => return Err("unterminated string".into()),
                        Some(&c) if c == q => {
                            pos += 1;
                            break;
                        }
                        Some('\\') => {
                            let (c, used) = unescape(&chars[pos + 1..])?;
                            s.push(c);
                            pos += 1 + used;
                        }
                        Some(&c) => {
                            s.push(c);
                            pos += 1;
                        }
                    }
                }
                items.push(ListItem::Str(s));
            }
            Some(c) if c.is_ascii_digit() || *c == '-' => {
                let start = pos;
                pos += 1;
                while chars.get(pos).is_some_and(|c| c.is_ascii_digit()) {
                    pos += 1;
                }
                let lit: String = chars[start..pos].iter().collect();
                items.push(ListItem::Int(lit.parse().map_err(|_| format!("bad integer {lit:?}"))?));
            }
            Some(c) => return Err(format!("unexpected {c:?} at offset {pos}")),
        }
        while chars.get(pos).is_some_and(|c| c.is_whitespace()) {
            pos += 1;
        }
        match chars.get(pos) {
            Some(',') => pos += 1,
            Some(']') => {}
            other => return Err(format!("expected ',' or ']' at offset {pos}, found {other:?}")),
        }
    }
    if pos != chars.len() {
        return Err(format!("trailing characters at offset {pos}"));
    }
    Ok(items)
}

fn unescape(rest: &[char]) -> Result<(char, usize), String> {
    let hex = |n: usize| -> Result<(char, usize), String> {
        let digits: String = rest.get(1..1 + n).ok_or("truncated escape")?.iter().collect();
        let code = u32::from_str_radix(&digits, 16).map_err(|_| format!("bad escape \\{}{digits}", rest[0]))?;
        char::from_u32(code).map(|c| (c, 1 + n)).ok_or_else(|| format!("invalid code point {code:#x}"))
    };
    match rest.first() {
        Some('n') => Ok(('\n', 1)),
        Some('t') => Ok(('\t', 1)),
        Some('r') => Ok(('\r', 1)),
        Some('x') => hex(2),
        Some('u') => hex(4),
        Some('U') => hex(8),
        Some(&c @ ('\\' | '\'' | '"' | '/')) => Ok((c, 1)),
        other => Err(format!("unsupported escape {other:?}")),
    }
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

pub(crate) fn parse_tabular<R: BufRead>(source: R, delimiter: u8) -> Result<Vec<(usize, Document)>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::malformed(1, "<header>", e.to_string()))?
        .clone();
    let id_col = find_column(&headers, ID_COLUMNS);
    let text_col = find_column(&headers, TEXT_COLUMNS);
    let tokens_col = find_column(&headers, TOKEN_COLUMNS)
        .ok_or_else(|| CorpusError::malformed(1, "tokens", "no tokens column in header"))?;
    let labels_col = find_column(&headers, LABEL_COLUMNS);

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CorpusError::malformed(i + 2, "<row>", e.to_string()))?;
        // csv reports the physical line, which differs from i + 2 for quoted newlines
        let line = row.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let id = match id_col {
            Some(c) => row.get(c).unwrap_or_default().trim().to_string(),
            None => i.to_string(),
        };
        let tokens = parse_python_list(row.get(tokens_col).unwrap_or_default())
            .map_err(|e| CorpusError::malformed(line, "tokens", e))?
            .into_iter()
            .map(|item| match item {
                ListItem::Str(s) => Ok(s),
                ListItem::Int(_) => Err(CorpusError::malformed(line, "tokens", "expected strings")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels = match labels_col.and_then(|c| row.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(cell) => Some(
                parse_python_list(cell)
                    .map_err(|e| CorpusError::malformed(line, "labels", e))?
                    .into_iter()
                    .map(|item| match item {
                        ListItem::Int(v) => LabelId::new(v).map_err(|source| CorpusError::UnknownLabel { line, source }),
                        ListItem::Str(_) => Err(CorpusError::malformed(line, "labels", "expected integers")),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let doc = match text_col.and_then(|c| row.get(c)) {
            Some(text) => Document::new(id.clone(), text, tokens, labels),
            None => Document::from_words(id.clone(), tokens, labels),
        }
        .map_err(|e| CorpusError::from_document(line, &id, e))?;
        out.push((line, doc));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_dataset, DatasetFormat, Split};

    #[test]
    fn python_repr_lists() {
        assert_eq!(
            parse_python_list(r#"['this', "don't", 'a\'b', 'tab\tx', 'é']"#).unwrap(),
            vec![
                ListItem::Str("this".into()),
                ListItem::Str("don't".into()),
                ListItem::Str("a'b".into()),
                ListItem::Str("tab\tx".into()),
                ListItem::Str("é".into()),
            ]
        );
        assert_eq!(parse_python_list("[1, 1,0 ]").unwrap(), vec![ListItem::Int(1), ListItem::Int(1), ListItem::Int(0)]);
        assert_eq!(parse_python_list("[]").unwrap(), vec![]);
        assert!(parse_python_list("[1, 2").is_err());
        assert!(parse_python_list("1, 2]").is_err());
        assert!(parse_python_list("[1 2]").is_err());
        assert!(parse_python_list("['a'] x").is_err());
    }

    #[test]
    fn csv_export() {
        let src = "index,text,tokens,token_label_ids\n\
                   7,\"this was, yes\",\"['this', 'was,', 'yes']\",\"[1, 1, 0]\"\n\
                   8,plain,\"[\"\"plain\"\"]\",\n";
        let ds = parse_dataset(src.as_bytes(), DatasetFormat::Csv, Split::Train).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.documents()[0].id(), "7");
        assert_eq!(ds.documents()[0].labels().unwrap().len(), 3);
        assert!(ds.documents()[1].labels().is_none());
    }

    #[test]
    fn tsv_without_text_column() {
        let src = "id\ttokens\tlabels\nq\t[\"a\", \"b\"]\t[2, 3]\n";
        let ds = parse_dataset(src.as_bytes(), DatasetFormat::Tsv, Split::Dev).unwrap();
        assert_eq!(ds.documents()[0].text(), "a b");
    }

    #[test]
    fn tabular_errors() {
        let bad_label = "id,tokens,labels\nq,\"['a']\",\"[9]\"\n";
        assert!(matches!(
            parse_dataset(bad_label.as_bytes(), DatasetFormat::Csv, Split::Dev).unwrap_err(),
            CorpusError::UnknownLabel { line: 2, .. }
        ));
        let mismatch = "id,tokens,labels\nq,\"['a','b']\",\"[0]\"\n";
        assert!(matches!(
            parse_dataset(mismatch.as_bytes(), DatasetFormat::Csv, Split::Dev).unwrap_err(),
            CorpusError::LengthMismatch { line: 2, .. }
        ));
        let no_tokens = "id,text\nq,a\n";
        assert!(matches!(
            parse_dataset(no_tokens.as_bytes(), DatasetFormat::Csv, Split::Dev).unwrap_err(),
            CorpusError::MalformedRecord { .. }
        ));
    }
}
