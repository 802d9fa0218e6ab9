//! Macro-averaged F1 over token labels, with confusion statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::Dataset;
use crate::label::{LabelId, LabelMap, NUM_CLASSES};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold has {gold} labels but prediction has {pred}{}", doc_id.as_ref().map(|d| format!(" (document {d:?})")).unwrap_or_default())]
    LengthMismatch { doc_id: Option<String>, gold: usize, pred: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("no prediction for document {0:?}")]
    MissingPrediction(String),
    #[error("prediction for unknown document {0:?}")]
    ExtraPrediction(String),
    #[error("more than one prediction for document {0:?}")]
    DuplicatePrediction(String),
    #[error("gold document {0:?} has no labels")]
    MissingGold(String),
}

/// Which classes enter the macro average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassPolicy {
    /// Classes occurring in gold or prediction.
    #[default]
    Present,
    AllFour,
}

impl std::str::FromStr for ClassPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "present" => Ok(ClassPolicy::Present),
            "all_four" | "all-four" => Ok(ClassPolicy::AllFour),
            other => Err(format!("unknown class policy {other:?} (expected present or all_four)")),
        }
    }
}

/// `counts[gold][pred]` token counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sequence(&mut self, gold: &[LabelId], pred: &[LabelId]) -> Result<(), EvalError> {
        if gold.len() != pred.len() {
            return Err(EvalError::LengthMismatch { doc_id: None, gold: gold.len(), pred: pred.len() });
        }
        for (g, p) in gold.iter().zip(pred) {
            self.counts[g.index()][p.index()] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn get(&self, gold: LabelId, pred: LabelId) -> u64 {
        self.counts[gold.index()][pred.index()]
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    /// Gold support of a class.
    pub fn row_sum(&self, class: LabelId) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    /// Number of times a class was predicted.
    pub fn column_sum(&self, class: LabelId) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn classes(&self, policy: ClassPolicy) -> BTreeSet<LabelId> {
        LabelId::all()
            .filter(|&c| policy == ClassPolicy::AllFour || self.row_sum(c) + self.column_sum(c) > 0)
            .collect()
    }

    /// Precision, recall and F1 of one class; empty denominators give 0.
    pub fn class_stats<T: Scalar>(&self, class: LabelId) -> ClassStats<T> {
        let tp = self.get(class, class);
        let predicted = self.column_sum(class);
        let support = self.row_sum(class);
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                T::zero()
            } else {
                T::from_count(num) / T::from_count(den)
            }
        };
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let sum = precision + recall;
        let f1 = if sum == T::zero() { T::zero() } else { T::from_count(2) * precision * recall / sum };
        ClassStats { precision, recall, f1, support }
    }
}

pub fn confusion_counts(gold: &[LabelId], pred: &[LabelId]) -> Result<ConfusionMatrix, EvalError> {
    let mut m = ConfusionMatrix::new();
    m.add_sequence(gold, pred)?;
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassStats<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub support: u64,
}

pub fn macro_f1<T: Scalar>(gold: &[LabelId], pred: &[LabelId], policy: ClassPolicy) -> Result<T, EvalError> {
    Ok(EvalReport::from_confusion(confusion_counts(gold, pred)?, policy)?.macro_f1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport<T> {
    pub per_class: BTreeMap<LabelId, ClassStats<T>>,
    pub macro_f1: T,
    pub confusion: ConfusionMatrix,
    pub token_count: u64,
    pub classes_evaluated: BTreeSet<LabelId>,
    pub policy: ClassPolicy,
}

impl<T: Scalar> EvalReport<T> {
    pub fn from_confusion(confusion: ConfusionMatrix, policy: ClassPolicy) -> Result<Self, EvalError> {
        let token_count = confusion.total();
        if token_count == 0 {
            return Err(EvalError::EmptyInput);
        }
        let classes_evaluated = confusion.classes(policy);
        let per_class: BTreeMap<_, _> = LabelId::all().map(|c| (c, confusion.class_stats::<T>(c))).collect();
        let sum = classes_evaluated.iter().fold(T::zero(), |acc, c| acc + per_class[c].f1);
        let macro_f1 = sum / T::from_count(classes_evaluated.len() as u64);
        Ok(EvalReport { per_class, macro_f1, confusion, token_count, classes_evaluated, policy })
    }

    /// Macro-F1 as a percentage with two decimals, e.g. `"99.46"`.
    pub fn macro_percent(&self) -> String {
        format_percent(self.macro_f1)
    }

    pub fn to_json(&self, names: &LabelMap) -> Value {
        let per_class: Vec<Value> = self
            .per_class
            .iter()
            .map(|(c, s)| {
                json!({
                    "label": c.value(),
                    "name": names.name(*c),
                    "evaluated": self.classes_evaluated.contains(c),
                    "precision": s.precision.to_f64_lossy(),
                    "recall": s.recall.to_f64_lossy(),
                    "f1": s.f1.to_f64_lossy(),
                    "support": s.support,
                })
            })
            .collect();
        json!({
            "macro_f1": self.macro_f1.to_f64_lossy(),
            "macro_f1_percent": self.macro_percent(),
            "class_policy": self.policy,
            "token_count": self.token_count,
            "classes_evaluated": self.classes_evaluated.iter().map(|c| c.value()).collect::<Vec<_>>(),
            "per_class": per_class,
            "confusion": self.confusion.counts(),
        })
    }

    /// Aligned text table with per-class rows and the confusion matrix.
    pub fn render_table(&self, names: &LabelMap) -> String {
        let width = LabelId::all().map(|c| names.name(c).len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
            "class", "precision", "recall", "f1", "support"
        ));
        for (c, s) in &self.per_class {
            let mark = if self.classes_evaluated.contains(c) { "" } else { " (not evaluated)" };
            out.push_str(&format!(
                "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}{mark}\n",
                names.name(*c),
                format_percent(s.precision),
                format_percent(s.recall),
                format_percent(s.f1),
                s.support,
            ));
        }
        out.push_str(&format!("\nconfusion (rows gold, columns predicted), {} tokens\n", self.token_count));
        for gold in LabelId::all() {
            let cells: Vec<String> = LabelId::all().map(|p| format!("{:>9}", self.confusion.get(gold, p))).collect();
            out.push_str(&format!("{:<width$}  {}\n", names.name(gold), cells.join("  ")));
        }
        out.push_str(&format!(
            "\nmacro-F1: {} ({:.6})\n",
            self.macro_percent(),
            self.macro_f1.to_f64_lossy()
        ));
        out
    }
}

impl<T: Scalar> fmt::Display for EvalReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_table(&LabelMap::default()))
    }
}

pub fn format_percent<T: Scalar>(fraction: T) -> String {
    format!("{:.2}", fraction.to_f64_lossy() * 100.0)
}

/// Corpus-level evaluation: tokens of all documents are pooled before the
/// per-class counts are taken.
pub fn evaluate_dataset<'a, T, I>(gold: &Dataset, predictions: I, policy: ClassPolicy) -> Result<EvalReport<T>, EvalError>
where
    T: Scalar,
    I: IntoIterator<Item = (&'a str, &'a [LabelId])>,
{
    let gold_ids: HashSet<&str> = gold.documents().iter().map(|d| d.id()).collect();
    let mut by_id: HashMap<&str, &[LabelId]> = HashMap::new();
    for (id, labels) in predictions {
        if !gold_ids.contains(id) {
            return Err(EvalError::ExtraPrediction(id.to_string()));
        }
        if by_id.insert(id, labels).is_some() {
            return Err(EvalError::DuplicatePrediction(id.to_string()));
        }
    }
    let mut confusion = ConfusionMatrix::new();
    for doc in gold.documents() {
        let gold_labels = doc.labels().ok_or_else(|| EvalError::MissingGold(doc.id().to_string()))?;
        let pred = by_id.get(doc.id()).ok_or_else(|| EvalError::MissingPrediction(doc.id().to_string()))?;
        confusion.add_sequence(gold_labels, pred).map_err(|e| match e {
            EvalError::LengthMismatch { gold, pred, .. } => {
                EvalError::LengthMismatch { doc_id: Some(doc.id().to_string()), gold, pred }
            }
            other => other,
        })?;
    }
    EvalReport::from_confusion(confusion, policy)
}
