use mgtd_core::alignment::{align, chunk_alignment, Aggregation, Subtokenizer, SubtokenizerError};
use mgtd_core::corpus::{Dataset, Document, Split};
use mgtd_core::distribution::one_hot;
use mgtd_core::ensemble::{majority_vote, TiePolicy};
use mgtd_core::evaluation::{confusion_counts, evaluate_dataset, macro_f1, ClassPolicy, EvalReport};
use mgtd_core::scorer::{mock_scorer, predict_document};
use mgtd_core::{Distribution, ExactRatio, LabelId};
use proptest::prelude::*;

fn labels(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<LabelId>> {
    prop::collection::vec((0usize..4).prop_map(LabelId::from_index), len)
}

fn pair(len: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<LabelId>, Vec<LabelId>)> {
    len.prop_flat_map(|n| (labels(n..n + 1), labels(n..n + 1)))
}

struct Counted;

impl Subtokenizer for Counted {
    fn vocab_size(&self) -> usize {
        64
    }
    fn encode(&self, word: &str) -> Result<Vec<u32>, SubtokenizerError> {
        Ok(vec![7; word.len()])
    }
    fn special_token_overhead(&self) -> usize {
        0
    }
}

proptest! {
    #[test]
    fn macro_f1_bounds((gold, pred) in pair(1..120)) {
        let f: f64 = macro_f1(&gold, &pred, ClassPolicy::Present).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let exact: ExactRatio = macro_f1(&gold, &pred, ClassPolicy::Present).unwrap();
        prop_assert_eq!(exact == ExactRatio::from_integer(1), gold == pred);
    }

    #[test]
    fn macro_f1_label_permutation_invariant(
        (gold, pred) in pair(1..120),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let p = |v: &[LabelId]| -> Vec<LabelId> { v.iter().map(|l| LabelId::from_index(perm[l.index()])).collect() };
        for policy in [ClassPolicy::Present, ClassPolicy::AllFour] {
            let before: ExactRatio = macro_f1(&gold, &pred, policy).unwrap();
            let after: ExactRatio = macro_f1(&p(&gold), &p(&pred), policy).unwrap();
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn pooling_matches_concatenation(docs in prop::collection::vec(pair(1..40), 1..6)) {
        let gold_docs: Vec<Document> = docs
            .iter()
            .enumerate()
            .map(|(i, (g, _))| {
                let words = (0..g.len()).map(|k| format!("w{k}")).collect();
                Document::from_words(format!("d{i}"), words, Some(g.clone())).unwrap()
            })
            .collect();
        let ids: Vec<String> = (0..docs.len()).map(|i| format!("d{i}")).collect();
        let dataset = Dataset::new(Split::Dev, gold_docs).unwrap();
        let preds = ids.iter().map(String::as_str).zip(docs.iter().map(|(_, p)| p.as_slice()));
        let pooled: EvalReport<ExactRatio> = evaluate_dataset(&dataset, preds, ClassPolicy::Present).unwrap();

        let gold_all: Vec<LabelId> = docs.iter().flat_map(|(g, _)| g.clone()).collect();
        let pred_all: Vec<LabelId> = docs.iter().flat_map(|(_, p)| p.clone()).collect();
        let whole = EvalReport::<ExactRatio>::from_confusion(confusion_counts(&gold_all, &pred_all).unwrap(), ClassPolicy::Present).unwrap();
        prop_assert_eq!(pooled.macro_f1, whole.macro_f1);
        prop_assert_eq!(pooled.confusion, whole.confusion);
    }

    #[test]
    fn vote_is_permutation_invariant_and_unanimous(
        models in (1usize..6, 1usize..50).prop_flat_map(|(n, len)| prop::collection::vec(labels(len..len + 1), n)),
        policy in prop_oneof![Just(TiePolicy::LowestId), Just(TiePolicy::SumProbabilityThenLowestId)],
    ) {
        let dists: Vec<Vec<Distribution<f64>>> =
            models.iter().map(|m| m.iter().map(|&l| one_hot(l)).collect()).collect();
        let forward = majority_vote(&models, Some(&dists), policy).unwrap();
        let mut rev_models = models.clone();
        rev_models.reverse();
        let mut rev_dists = dists.clone();
        rev_dists.reverse();
        let backward = majority_vote(&rev_models, Some(&rev_dists), policy).unwrap();
        prop_assert_eq!(&forward, &backward);
        for pos in 0..models[0].len() {
            if models.iter().all(|m| m[pos] == models[0][pos]) {
                prop_assert_eq!(forward.labels[pos], models[0][pos]);
            }
        }
    }

    #[test]
    fn copies_vote_to_themselves(model in labels(1..80), copies in 1usize..6) {
        let models = vec![model.clone(); copies];
        let out = majority_vote::<_, f64>(&models, None, TiePolicy::LowestId).unwrap();
        prop_assert_eq!(out.labels, model);
    }

    #[test]
    fn chunk_count_is_monotone_in_capacity(
        lens in prop::collection::vec(1usize..20, 1..80),
        cap in 1usize..60,
        extra in 0usize..30,
    ) {
        let words: Vec<String> = lens.iter().map(|&n| "x".repeat(n)).collect();
        let a = align(&words, &Counted).unwrap();
        let small = chunk_alignment(&a, cap, 0).unwrap();
        let large = chunk_alignment(&a, cap + extra, 0).unwrap();
        prop_assert!(large.len() <= small.len());
    }

    #[test]
    fn pipeline_is_deterministic(seed in any::<u64>(), len in 1usize..200) {
        let words: Vec<String> = (0..len).map(|i| format!("t{}", i * 7919 % 1000)).collect();
        let doc = Document::from_words("p", words, None).unwrap();
        let s = mock_scorer(Default::default(), 0.3, seed).unwrap();
        let a = predict_document::<f64, _>(&s, &doc, 256, Aggregation::Mean).unwrap();
        let b = predict_document::<f64, _>(&s, &doc, 256, Aggregation::Mean).unwrap();
        prop_assert_eq!(a.labels.len(), len);
        prop_assert!(a.distributions.iter().zip(&b.distributions).all(|(x, y)| x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())));
    }
}
