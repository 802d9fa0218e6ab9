use crate::label::{LabelId, NUM_CLASSES};
use crate::scalar::Probability;

/// Probability row over the four classes.
pub type Distribution<T> = [T; NUM_CLASSES];

pub fn one_hot<T: Probability>(label: LabelId) -> Distribution<T> {
    let mut row = [T::zero(); NUM_CLASSES];
    row[label.index()] = T::one();
    row
}

/// Highest-probability class; ties go to the lowest label id.
pub fn argmax<T: Probability>(row: &Distribution<T>) -> LabelId {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = i;
        }
    }
    LabelId::from_index(best)
}

/// Non-negative, finite, and summing to one within [`Probability::sum_tolerance`].
pub fn is_distribution<T: Probability>(row: &Distribution<T>) -> bool {
    if row.iter().any(|p| !p.is_finite() || *p < T::zero()) {
        return false;
    }
    let sum = row.iter().fold(T::zero(), |acc, &p| acc + p);
    (sum - T::one()).abs() <= T::sum_tolerance()
}

/// Numerically stable softmax of a logit row.
pub fn softmax<T: Probability>(logits: &Distribution<T>) -> Distribution<T> {
    let max = logits.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    let mut out = logits.map(|x| (x - max).exp());
    let sum = out.iter().fold(T::zero(), |acc, &p| acc + p);
    for p in &mut out {
        *p = *p / sum;
    }
    out
}
