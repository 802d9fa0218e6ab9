//! Subcommand implementations. Each writes its human-readable output to the
//! supplied stream and its files atomically under the output directory.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use mgtd_core::corpus::{write_jsonl, DatasetFormat};
use mgtd_core::distribution::one_hot;
use mgtd_core::ensemble::{majority_vote, select_top_k};
use mgtd_core::evaluation::evaluate_dataset;
use mgtd_core::prediction::write_predictions;
use mgtd_core::scorer::{predict_document, MockScorer};
use mgtd_core::{
    ClassPolicy, Dataset, Distribution, EvalReport, LabelMap, PredictionRecord, Scorer, Split, TiePolicy,
};
use mgtd_onnx::{load_artifact_dir, load_serialized_scorer};

use crate::ablation::{read_records, AblationGrid, BoldAxis, GridError};
use crate::config::{load_rule, ModelSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::fsio::{load_dataset, load_predictions, open, write_atomic};
use crate::report::DocumentReport;

pub const PREDICTIONS_SUFFIX: &str = ".predictions.jsonl";
pub const ENSEMBLE_FILE: &str = "ensemble.predictions.jsonl";
pub const EVAL_FILE: &str = "eval.json";

pub fn predictions_path(dir: &Path, model_id: &str) -> PathBuf {
    dir.join(format!("{model_id}{PREDICTIONS_SUFFIX}"))
}

/// `<id>.predictions.jsonl` → `<id>`; other names keep their file stem.
pub fn model_id_of(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match name.strip_suffix(PREDICTIONS_SUFFIX) {
        Some(id) => id.to_string(),
        None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or(name),
    }
}

pub fn convert(input: &Path, format: Option<DatasetFormat>, split: Split, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let dataset = match format {
        Some(f) => mgtd_core::corpus::parse_dataset(open(input)?, f, split)
            .map_err(|e| CliError::data(format!("{}: {e}", input.display())))?,
        None => load_dataset(input, split)?,
    };
    match out {
        Some(dir) => {
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| split.to_string());
            let path = dir.join(format!("{stem}.jsonl"));
            write_atomic(&path, |w| write_jsonl(w, dataset.documents()))?;
            writeln!(stdout, "wrote {} documents to {}", dataset.len(), path.display()).map_err(|e| CliError::io("stdout", e))
        }
        None => write_jsonl(stdout, dataset.documents()).map_err(|e| CliError::io("stdout", e)),
    }
}

fn build_scorer(spec: &ModelSpec, default_seed: u64) -> CliResult<Box<dyn Scorer<f64>>> {
    match spec {
        ModelSpec::Mock { id, rule, noise_rate, seed } => {
            let rule = load_rule(rule)?;
            let scorer = MockScorer::new(id.clone(), rule, *noise_rate, seed.unwrap_or(default_seed))
                .map_err(|e| CliError::validation(format!("model {id:?}: {e}")))?;
            Ok(Box::new(scorer))
        }
        ModelSpec::Onnx { id, path, tokenizer } => {
            let loaded = match tokenizer {
                Some(t) => load_serialized_scorer(path, t),
                None => load_artifact_dir(path),
            };
            let scorer = loaded.map_err(|e| match e {
                mgtd_onnx::LoadError::MissingFile(_) => CliError::validation(format!("model {id:?}: {e}")),
                other => CliError::data(format!("model {id:?}: {other}")),
            })?;
            Ok(Box::new(scorer.with_id(id.clone())))
        }
    }
}

pub fn resolve_dataset(cfg: &RunConfig, explicit: Option<&Path>, split: Split, what: &str) -> CliResult<Dataset> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => cfg
            .datasets
            .get(split)
            .cloned()
            .ok_or_else(|| CliError::validation(format!("datasets.{split}: no {what} given for split {split}")))?,
    };
    load_dataset(&path, split)
}

/// Runs every configured model over the dataset; returns the written paths.
pub fn predict(cfg: &RunConfig, input: Option<&Path>, out_dir: &Path, stdout: &mut dyn Write) -> CliResult<Vec<PathBuf>> {
    cfg.validate()?;
    if cfg.models.is_empty() {
        return Err(CliError::validation("models: at least one model is required"));
    }
    let dataset = resolve_dataset(cfg, input, cfg.split, "input dataset")?;
    let mut written = Vec::new();
    for spec in &cfg.models {
        let scorer = build_scorer(spec, cfg.seed)?;
        let mut records = Vec::with_capacity(dataset.len());
        for doc in dataset.documents() {
            let pred = predict_document::<f64, _>(scorer.as_ref(), doc, cfg.max_subtokens, cfg.aggregation)
                .map_err(|e| CliError::data(format!("model {:?}, document {:?}: {e}", spec.id(), doc.id())))?;
            records.push(PredictionRecord::from_prediction(&pred, cfg.write_distributions));
        }
        let path = predictions_path(out_dir, spec.id());
        write_atomic(&path, |w| write_predictions(w, &records))?;
        writeln!(stdout, "{}: {} documents -> {}", spec.id(), records.len(), path.display())
            .map_err(|e| CliError::io("stdout", e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Debug)]
pub struct EnsembleOptions {
    pub tie_policy: TiePolicy,
    pub tallies: bool,
    /// Dev-set scores per model id; when set only the best `k` files vote.
    pub select: Option<(BTreeMap<String, f64>, usize)>,
}

/// Votes over prediction records. Files are matched by doc id and the output
/// follows the first file's document order. A file without distributions
/// contributes one-hot rows to the probability tie-break.
pub fn ensemble_records(members: &[(String, Vec<PredictionRecord>)], opts: &EnsembleOptions) -> CliResult<Vec<PredictionRecord>> {
    let (first_id, first) = members.first().ok_or_else(|| CliError::validation("ensemble: no prediction files given"))?;
    let reference: HashSet<&str> = first.iter().map(|r| r.doc_id.as_str()).collect();
    let mut indexed: Vec<HashMap<&str, &PredictionRecord>> = Vec::with_capacity(members.len());
    for (id, records) in members {
        let map: HashMap<&str, &PredictionRecord> = records.iter().map(|r| (r.doc_id.as_str(), r)).collect();
        let ids: HashSet<&str> = map.keys().copied().collect();
        if ids != reference {
            let mut missing: Vec<&str> = reference.difference(&ids).copied().collect();
            let mut extra: Vec<&str> = ids.difference(&reference).copied().collect();
            missing.sort_unstable();
            extra.sort_unstable();
            return Err(CliError::data(format!(
                "DocIdMismatch: {id:?} differs from {first_id:?} (missing {missing:?}, extra {extra:?})"
            )));
        }
        indexed.push(map);
    }
    let mut out = Vec::with_capacity(first.len());
    for doc in first {
        let rows: Vec<&PredictionRecord> = indexed.iter().map(|m| m[doc.doc_id.as_str()]).collect();
        for (rec, (id, _)) in rows.iter().zip(members) {
            if rec.labels.len() != doc.labels.len() {
                return Err(CliError::data(format!(
                    "LengthMismatch: document {:?} has {} labels in {id:?} and {} in {first_id:?}",
                    doc.doc_id,
                    rec.labels.len(),
                    doc.labels.len()
                )));
            }
        }
        let labels: Vec<&[mgtd_core::LabelId]> = rows.iter().map(|r| r.labels.as_slice()).collect();
        let dists: Vec<Vec<Distribution<f64>>> = rows
            .iter()
            .map(|r| r.distributions.clone().unwrap_or_else(|| r.labels.iter().map(|&l| one_hot(l)).collect()))
            .collect();
        let vote = majority_vote(&labels, Some(&dists), opts.tie_policy).map_err(CliError::data)?;
        out.push(PredictionRecord {
            doc_id: doc.doc_id.clone(),
            labels: vote.labels,
            distributions: None,
            tallies: opts.tallies.then_some(vote.tallies),
        });
    }
    Ok(out)
}

pub fn ensemble(files: &[PathBuf], opts: &EnsembleOptions, out_dir: &Path, stdout: &mut dyn Write) -> CliResult<PathBuf> {
    let mut members: Vec<(String, PathBuf)> = files.iter().map(|p| (model_id_of(p), p.clone())).collect();
    if let Some((scores, k)) = &opts.select {
        let available: HashSet<&str> = members.iter().map(|(id, _)| id.as_str()).collect();
        let scored = scores.iter().filter(|(id, _)| available.contains(id.as_str())).map(|(id, &s)| (id.as_str(), s));
        let chosen = select_top_k(scored, *k).map_err(|e| CliError::validation(format!("--select: {e}")))?;
        members = chosen
            .iter()
            .map(|id| members.iter().find(|(m, _)| m == id).cloned().expect("selected from available ids"))
            .collect();
    }
    let mut loaded = Vec::with_capacity(members.len());
    for (id, path) in &members {
        loaded.push((id.clone(), load_predictions(path)?));
    }
    let records = ensemble_records(&loaded, opts)?;
    let path = out_dir.join(ENSEMBLE_FILE);
    write_atomic(&path, |w| write_predictions(w, &records))?;
    let ids: Vec<&str> = members.iter().map(|(id, _)| id.as_str()).collect();
    writeln!(stdout, "ensemble of {}: {} documents -> {}", ids.join(", "), records.len(), path.display())
        .map_err(|e| CliError::io("stdout", e))?;
    Ok(path)
}

pub fn evaluate_records(gold: &Dataset, preds: &[PredictionRecord], policy: ClassPolicy) -> CliResult<EvalReport<f64>> {
    evaluate_dataset(gold, preds.iter().map(|r| (r.doc_id.as_str(), r.labels.as_slice())), policy).map_err(CliError::data)
}

pub fn evaluate(
    gold: &Dataset,
    pred_path: &Path,
    policy: ClassPolicy,
    labels: &LabelMap,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<EvalReport<f64>> {
    let preds = load_predictions(pred_path)?;
    let report = evaluate_records(gold, &preds, policy)?;
    stdout.write_all(report.render_table(labels).as_bytes()).map_err(|e| CliError::io("stdout", e))?;
    if let Some(dir) = out_dir {
        let json = report.to_json(labels);
        write_atomic(&dir.join(EVAL_FILE), |w| {
            serde_json::to_writer_pretty(&mut *w, &json)?;
            w.write_all(b"\n")
        })?;
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(format!("unknown table format {s:?} (expected markdown or csv)")),
        }
    }
}

pub fn ablate(records_dir: &Path, bold: BoldAxis, format: TableFormat, out_dir: Option<&Path>, stdout: &mut dyn Write) -> CliResult<AblationGrid> {
    let records = read_records(records_dir)?;
    let grid = AblationGrid::from_records(&records).map_err(|e| match e {
        GridError::InvalidRecord(m) => CliError::validation(m),
        other => CliError::data(other),
    })?;
    let markdown = grid.to_markdown(bold);
    let csv = grid.to_csv();
    let shown = match format {
        TableFormat::Markdown => &markdown,
        TableFormat::Csv => &csv,
    };
    stdout.write_all(shown.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("ablation.md"), |w| w.write_all(markdown.as_bytes()))?;
        write_atomic(&dir.join("ablation.csv"), |w| w.write_all(csv.as_bytes()))?;
    }
    Ok(grid)
}

pub fn report(
    pred_path: &Path,
    gold: Option<&Dataset>,
    labels: &LabelMap,
    json: bool,
    stdout: &mut dyn Write,
) -> CliResult<Vec<DocumentReport>> {
    let preds = load_predictions(pred_path)?;
    let mut reports = Vec::with_capacity(preds.len());
    for rec in &preds {
        let gold_labels = match gold {
            None => None,
            Some(ds) => {
                let doc = ds
                    .get(&rec.doc_id)
                    .ok_or_else(|| CliError::data(format!("document {:?} is not in the gold set", rec.doc_id)))?;
                let g = doc.labels().ok_or_else(|| CliError::data(format!("document {:?} has no gold labels", rec.doc_id)))?;
                if g.len() != rec.labels.len() {
                    return Err(CliError::data(format!(
                        "document {:?}: {} gold labels, {} predicted",
                        rec.doc_id,
                        g.len(),
                        rec.labels.len()
                    )));
                }
                Some(g)
            }
        };
        let r = DocumentReport::new(&rec.doc_id, &rec.labels, gold_labels)
            .map_err(|e| CliError::data(format!("document {:?}: {e}", rec.doc_id)))?;
        let text = if json {
            format!("{}\n", r.to_json(labels))
        } else {
            r.render(labels)
        };
        stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
        reports.push(r);
    }
    Ok(reports)
}
