//! Span view of prediction files.

use mgtd_core::corpus::{labels_to_spans, SpanError};
use mgtd_core::{LabelId, LabelMap, SpanAnnotation};
use serde::Serialize;

/// A maximal run of words where gold and prediction agree on the same wrong
/// pair `(gold, predicted)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub start: usize,
    pub end: usize,
    pub gold: LabelId,
    pub predicted: LabelId,
}

pub fn disagreement_spans(gold: &[LabelId], pred: &[LabelId]) -> Vec<Disagreement> {
    let mut out: Vec<Disagreement> = Vec::new();
    for (i, (&g, &p)) in gold.iter().zip(pred).enumerate() {
        if g == p {
            continue;
        }
        match out.last_mut() {
            Some(d) if d.end == i && d.gold == g && d.predicted == p => d.end = i + 1,
            _ => out.push(Disagreement { start: i, end: i + 1, gold: g, predicted: p }),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentReport {
    pub doc_id: String,
    pub spans: Vec<SpanAnnotation>,
    pub disagreements: Option<Vec<Disagreement>>,
}

impl DocumentReport {
    pub fn new(doc_id: &str, pred: &[LabelId], gold: Option<&[LabelId]>) -> Result<Self, SpanError> {
        Ok(DocumentReport {
            doc_id: doc_id.to_string(),
            spans: labels_to_spans(pred)?,
            disagreements: gold.map(|g| disagreement_spans(g, pred)),
        })
    }

    pub fn render(&self, names: &LabelMap) -> String {
        let mut out = format!("{}\n", self.doc_id);
        for s in &self.spans {
            out.push_str(&format!("  [{}, {}) {}\n", s.start, s.end, names.name(s.label)));
        }
        if let Some(ds) = &self.disagreements {
            out.push_str(&format!("  disagreements: {}\n", ds.len()));
            for d in ds {
                out.push_str(&format!(
                    "    [{}, {}) gold {} / predicted {}\n",
                    d.start,
                    d.end,
                    names.name(d.gold),
                    names.name(d.predicted)
                ));
            }
        }
        out
    }

    pub fn to_json(&self, names: &LabelMap) -> serde_json::Value {
        let spans: Vec<_> = self
            .spans
            .iter()
            .map(|s| serde_json::json!({"start": s.start, "end": s.end, "label": s.label, "name": names.name(s.label)}))
            .collect();
        let mut v = serde_json::json!({"doc_id": self.doc_id, "spans": spans});
        if let Some(ds) = &self.disagreements {
            v["disagreements"] = serde_json::to_value(ds).expect("plain struct");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[i64]) -> Vec<LabelId> {
        v.iter().map(|&x| LabelId::new(x).unwrap()).collect()
    }

    #[test]
    fn replacement_then_human() {
        let r = DocumentReport::new("d", &ids(&[1, 1, 0, 0]), None).unwrap();
        assert_eq!(
            r.spans,
            vec![SpanAnnotation::new(0, 2, LabelId::SYNONYM_REPLACED), SpanAnnotation::new(2, 4, LabelId::HUMAN)]
        );
        assert_eq!(r.render(&LabelMap::default()), "d\n  [0, 2) synonym-replaced\n  [2, 4) human\n");
    }

    #[test]
    fn all_human_is_one_span() {
        let r = DocumentReport::new("d", &ids(&[0; 6]), None).unwrap();
        assert_eq!(r.spans, vec![SpanAnnotation::new(0, 6, LabelId::HUMAN)]);
    }

    #[test]
    fn agreement_has_no_disagreements() {
        let l = ids(&[0, 2, 2, 3]);
        assert!(disagreement_spans(&l, &l).is_empty());
    }

    #[test]
    fn disagreement_runs_split_on_pair_change() {
        let d = disagreement_spans(&ids(&[0, 0, 0, 1, 1, 2]), &ids(&[2, 2, 3, 1, 0, 2]));
        let got: Vec<(usize, usize)> = d.iter().map(|d| (d.start, d.end)).collect();
        assert_eq!(got, [(0, 2), (2, 3), (4, 5)]);
    }
}
