use serde::{Deserialize, Serialize};

use crate::label::LabelId;

/// A maximal run of one label over word indices `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub start: usize,
    pub end: usize,
    pub label: LabelId,
}

impl SpanAnnotation {
    pub fn new(start: usize, end: usize, label: LabelId) -> Self {
        SpanAnnotation { start, end, label }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpanError {
    #[error("empty label sequence")]
    EmptyInput,
    #[error("words [{start}, {end}) are not covered by any span")]
    CoverageGap { start: usize, end: usize },
    #[error("span starting at {start} overlaps the previous span (which ends at {previous_end})")]
    Overlap { start: usize, previous_end: usize },
    #[error("span [{start}, {end}) is empty or exceeds word count {n}")]
    OutOfRange { start: usize, end: usize, n: usize },
}

pub fn labels_to_spans(labels: &[LabelId]) -> Result<Vec<SpanAnnotation>, SpanError> {
    let Some(&first) = labels.first() else {
        return Err(SpanError::EmptyInput);
    };
    let mut spans = Vec::new();
    let mut current = SpanAnnotation::new(0, 1, first);
    for (i, &label) in labels.iter().enumerate().skip(1) {
        if label == current.label {
            current.end = i + 1;
        } else {
            spans.push(current);
            current = SpanAnnotation::new(i, i + 1, label);
        }
    }
    spans.push(current);
    Ok(spans)
}

/// Inverse of [`labels_to_spans`]; spans must be sorted and tile `[0, n)`.
pub fn spans_to_labels(spans: &[SpanAnnotation], n: usize) -> Result<Vec<LabelId>, SpanError> {
    let mut labels = Vec::with_capacity(n);
    for span in spans {
        if span.is_empty() || span.end > n {
            return Err(SpanError::OutOfRange { start: span.start, end: span.end, n });
        }
        let cursor = labels.len();
        if span.start > cursor {
            return Err(SpanError::CoverageGap { start: cursor, end: span.start });
        }
        if span.start < cursor {
            return Err(SpanError::Overlap { start: span.start, previous_end: cursor });
        }
        labels.extend(std::iter::repeat_n(span.label, span.len()));
    }
    if labels.len() < n {
        return Err(SpanError::CoverageGap { start: labels.len(), end: n });
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(raw: &[u8]) -> Vec<LabelId> {
        raw.iter().map(|&v| LabelId::from_index(v as usize)).collect()
    }

    fn span(start: usize, end: usize, label: usize) -> SpanAnnotation {
        SpanAnnotation::new(start, end, LabelId::from_index(label))
    }

    #[test]
    fn runs() {
        assert_eq!(labels_to_spans(&ids(&[1, 1, 1, 0, 0])).unwrap(), [span(0, 3, 1), span(3, 5, 0)]);
        assert_eq!(labels_to_spans(&ids(&[0])).unwrap(), [span(0, 1, 0)]);
        assert_eq!(
            labels_to_spans(&ids(&[0, 1, 0, 1])).unwrap(),
            [span(0, 1, 0), span(1, 2, 1), span(2, 3, 0), span(3, 4, 1)]
        );
        assert_eq!(labels_to_spans(&[]), Err(SpanError::EmptyInput));
    }

    #[test]
    fn spans_back_to_labels() {
        assert_eq!(spans_to_labels(&[span(0, 2, 3)], 2).unwrap(), ids(&[3, 3]));
        assert_eq!(spans_to_labels(&[span(0, 1, 0), span(1, 3, 2)], 3).unwrap(), ids(&[0, 2, 2]));
        assert_eq!(spans_to_labels(&[span(0, 1, 0)], 2), Err(SpanError::CoverageGap { start: 1, end: 2 }));
        assert_eq!(
            spans_to_labels(&[span(0, 2, 0), span(1, 3, 1)], 3),
            Err(SpanError::Overlap { start: 1, previous_end: 2 })
        );
        assert_eq!(
            spans_to_labels(&[span(0, 1, 0), span(2, 3, 1)], 3),
            Err(SpanError::CoverageGap { start: 1, end: 2 })
        );
        assert_eq!(spans_to_labels(&[span(0, 4, 0)], 3), Err(SpanError::OutOfRange { start: 0, end: 4, n: 3 }));
        assert_eq!(spans_to_labels(&[span(1, 1, 0)], 3), Err(SpanError::OutOfRange { start: 1, end: 1, n: 3 }));
    }

    proptest! {
        #[test]
        fn round_trip(raw in prop::collection::vec(0u8..4, 1..300)) {
            let labels = ids(&raw);
            let spans = labels_to_spans(&labels).unwrap();
            prop_assert!(spans.windows(2).all(|w| w[0].end == w[1].start && w[0].label != w[1].label));
            prop_assert_eq!(spans_to_labels(&spans, labels.len()).unwrap(), labels);
        }
    }
}
