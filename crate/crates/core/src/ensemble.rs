//! Majority voting across independently trained scorers and dev-based member
//! selection.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::alignment::Aggregation;
use crate::corpus::Document;
use crate::distribution::Distribution;
use crate::label::{LabelId, NUM_CLASSES};
use crate::scalar::{Probability, Scalar};
use crate::scorer::{predict_document, DocumentPrediction, Scorer, ScorerError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnsembleError {
    #[error("no models to vote with")]
    NoModels,
    #[error("model {model} has {got} positions, expected {expected}")]
    LengthMismatch { model: usize, expected: usize, got: usize },
    #[error("tie policy sum_probability_then_lowest_id needs per-model distributions")]
    MissingDistributions,
    #[error("asked for {requested} models but only {available} were scored")]
    InsufficientModels { requested: usize, available: usize },
    #[error("ensemble member list is invalid: {0}")]
    InvalidConfig(String),
    #[error("member {member}: {source}")]
    Member { member: String, source: ScorerError },
}

/// How a position with several top-voted labels is resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Largest probability mass summed over models, then lowest label id.
    #[default]
    SumProbabilityThenLowestId,
    LowestId,
}

impl std::str::FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum_probability_then_lowest_id" => Ok(TiePolicy::SumProbabilityThenLowestId),
            "lowest_id" => Ok(TiePolicy::LowestId),
            other => Err(format!("unknown tie policy {other:?}")),
        }
    }
}

fn default_k() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub member_ids: Vec<String>,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    #[serde(default = "default_k")]
    pub selection_k: usize,
}

impl EnsembleConfig {
    pub fn new(member_ids: Vec<String>) -> Self {
        EnsembleConfig { member_ids, tie_policy: TiePolicy::default(), selection_k: default_k() }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.member_ids.is_empty() {
            return Err(EnsembleError::InvalidConfig("member_ids is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.member_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(EnsembleError::InvalidConfig(format!("duplicate member {dup:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteOutcome {
    pub labels: Vec<LabelId>,
    /// Votes per class at every position.
    pub tallies: Vec<[u32; NUM_CLASSES]>,
}

/// Per-position majority vote over `N` label sequences.
///
/// Summed probabilities are accumulated in sorted order so the result does not
/// depend on the order of the models.
pub fn majority_vote<L, T>(
    per_model_labels: &[L],
    per_model_dists: Option<&[Vec<Distribution<T>>]>,
    policy: TiePolicy,
) -> Result<VoteOutcome, EnsembleError>
where
    L: AsRef<[LabelId]>,
    T: Probability,
{
    let first = per_model_labels.first().ok_or(EnsembleError::NoModels)?;
    let len = first.as_ref().len();
    for (model, seq) in per_model_labels.iter().enumerate() {
        if seq.as_ref().len() != len {
            return Err(EnsembleError::LengthMismatch { model, expected: len, got: seq.as_ref().len() });
        }
    }
    let dists = match (policy, per_model_dists) {
        (TiePolicy::SumProbabilityThenLowestId, None) => return Err(EnsembleError::MissingDistributions),
        (TiePolicy::SumProbabilityThenLowestId, Some(d)) => {
            if d.len() != per_model_labels.len() {
                return Err(EnsembleError::MissingDistributions);
            }
            for (model, rows) in d.iter().enumerate() {
                if rows.len() != len {
                    return Err(EnsembleError::LengthMismatch { model, expected: len, got: rows.len() });
                }
            }
            Some(d)
        }
        (TiePolicy::LowestId, _) => None,
    };

    let mut labels = Vec::with_capacity(len);
    let mut tallies = Vec::with_capacity(len);
    let mut mass = Vec::with_capacity(per_model_labels.len());
    for pos in 0..len {
        let mut tally = [0u32; NUM_CLASSES];
        for seq in per_model_labels {
            tally[seq.as_ref()[pos].index()] += 1;
        }
        let top = *tally.iter().max().unwrap();
        let tied: Vec<usize> = (0..NUM_CLASSES).filter(|&c| tally[c] == top).collect();
        let winner = match (tied.as_slice(), dists) {
            ([only], _) => *only,
            (tied, Some(d)) => {
                let mut best = tied[0];
                let mut best_mass = T::neg_infinity();
                for &c in tied {
                    mass.clear();
                    mass.extend(d.iter().map(|rows| rows[pos][c]));
                    mass.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                    let total = mass.iter().fold(T::zero(), |acc, &p| acc + p);
                    if total > best_mass {
                        best = c;
                        best_mass = total;
                    }
                }
                best
            }
            (tied, None) => tied[0],
        };
        labels.push(LabelId::from_index(winner));
        tallies.push(tally);
    }
    Ok(VoteOutcome { labels, tallies })
}

/// The `k` best-scoring ids, best first; equal scores order by id.
pub fn select_top_k<'a, T, I>(dev_scores: I, k: usize) -> Result<Vec<String>, EnsembleError>
where
    T: Scalar,
    I: IntoIterator<Item = (&'a str, T)>,
{
    let mut scored: Vec<(&str, T)> = dev_scores.into_iter().collect();
    if k > scored.len() {
        return Err(EnsembleError::InsufficientModels { requested: k, available: scored.len() });
    }
    scored.sort_by(|(ia, a), (ib, b)| b.partial_cmp(a).unwrap_or(Ordering::Equal).then_with(|| ia.cmp(ib)));
    Ok(scored.into_iter().take(k).map(|(id, _)| id.to_string()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePrediction<T> {
    pub doc_id: String,
    pub labels: Vec<LabelId>,
    pub tallies: Vec<[u32; NUM_CLASSES]>,
    /// Member outputs in `config.member_ids` order.
    pub members: Vec<DocumentPrediction<T>>,
}

/// Runs every member on `doc` and votes at word level.
pub fn ensemble_predict<T, S>(
    members: &[S],
    doc: &Document,
    max_subtokens: usize,
    strategy: Aggregation,
    config: &EnsembleConfig,
) -> Result<EnsemblePrediction<T>, EnsembleError>
where
    T: Probability,
    S: Scorer<T>,
{
    config.validate()?;
    if members.len() != config.member_ids.len() {
        return Err(EnsembleError::InvalidConfig(format!(
            "{} scorers supplied for {} configured members",
            members.len(),
            config.member_ids.len()
        )));
    }
    let mut outputs = Vec::with_capacity(members.len());
    for id in &config.member_ids {
        let scorer = members
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| EnsembleError::InvalidConfig(format!("no scorer with id {id:?}")))?;
        let pred = predict_document(scorer, doc, max_subtokens, strategy)
            .map_err(|source| EnsembleError::Member { member: id.clone(), source })?;
        outputs.push(pred);
    }
    let labels: Vec<&[LabelId]> = outputs.iter().map(|p| p.labels.as_slice()).collect();
    let dists: Vec<Vec<Distribution<T>>> = outputs.iter().map(|p| p.distributions.clone()).collect();
    let vote = majority_vote(&labels, Some(&dists), config.tie_policy)?;
    Ok(EnsemblePrediction { doc_id: doc.id().to_string(), labels: vote.labels, tallies: vote.tallies, members: outputs })
}
