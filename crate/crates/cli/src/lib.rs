//! `mgtd` command-line front end.
//!
//! Subcommands: `convert`, `predict`, `ensemble`, `evaluate`, `ablate`,
//! `report`. Exit status is 0 on success, 2 for invalid configuration or
//! arguments and 3 for data errors.

pub mod ablation;
pub mod commands;
pub mod config;
pub mod error;
pub mod fsio;
pub mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mgtd_core::corpus::DatasetFormat;
use mgtd_core::{Aggregation, ClassPolicy, Split, TiePolicy};

use crate::ablation::BoldAxis;
use crate::commands::{EnsembleOptions, TableFormat};
use crate::config::{ModelSpec, RunConfig};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mgtd", version, about = "Token-level detection of machine-generated text")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = "MGTD_CONFIG")]
    pub config: Option<PathBuf>,
    /// Seed for stochastic backends; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a CSV/TSV/JSON-lines corpus to JSON lines.
    Convert(ConvertArgs),
    /// Run models over a dataset and write one predictions file per model.
    Predict(PredictArgs),
    /// Majority-vote over prediction files.
    Ensemble(EnsembleArgs),
    /// Token-level macro-F1 of a predictions file against gold labels.
    Evaluate(EvaluateArgs),
    /// Collate ablation records into the results grid.
    Ablate(AblateArgs),
    /// Show predicted spans, and disagreements with gold when given.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub in_format: Option<DatasetFormat>,
    #[arg(long, default_value = "train")]
    pub split: Split,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Dataset to label; defaults to the config's dataset for the split.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<Split>,
    /// Use a single model given on the command line instead of the config's.
    #[arg(long, value_parser = ["onnx", "mock"])]
    pub backend: Option<String>,
    #[arg(long)]
    pub model_id: Option<String>,
    /// Artifact directory or model.onnx (onnx backend).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub tokenizer: Option<PathBuf>,
    /// Word-to-label JSON object (mock backend).
    #[arg(long)]
    pub rule: Option<PathBuf>,
    #[arg(long)]
    pub noise_rate: Option<f64>,
    #[arg(long)]
    pub max_subtokens: Option<usize>,
    #[arg(long)]
    pub allow_custom_length: bool,
    #[arg(long)]
    pub aggregation: Option<Aggregation>,
    #[arg(long)]
    pub no_distributions: bool,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Prediction files; defaults to the config's ensemble members in the
    /// output directory.
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub tie_policy: Option<TiePolicy>,
    /// Emit per-word vote counts.
    #[arg(long)]
    pub tallies: bool,
    /// JSON object of dev macro-F1 per model id; keeps the best `--k` files.
    #[arg(long)]
    pub select: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gold dataset; defaults to the config's dataset for the split.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value = "present")]
    pub policy: ClassPolicy,
    #[arg(long)]
    pub split: Option<Split>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Directory of record JSON files.
    #[arg(long)]
    pub records: PathBuf,
    /// Which best values to bold: column, row or none.
    #[arg(long, default_value = "column")]
    pub bold: BoldAxis,
    /// Table printed to stdout: markdown or csv.
    #[arg(long, default_value = "markdown")]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<Split>,
    /// One JSON object per document instead of text.
    #[arg(long)]
    pub json: bool,
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn command_line_model(args: &PredictArgs) -> CliResult<Option<ModelSpec>> {
    let Some(backend) = args.backend.as_deref() else {
        if args.model.is_some() || args.rule.is_some() {
            return Err(CliError::validation("--model and --rule require --backend"));
        }
        return Ok(None);
    };
    let spec = match backend {
        "mock" => ModelSpec::Mock {
            id: args.model_id.clone().unwrap_or_else(|| "mock".into()),
            rule: args.rule.clone().ok_or_else(|| CliError::validation("--rule: required by the mock backend"))?,
            noise_rate: args.noise_rate.unwrap_or(0.0),
            seed: None,
        },
        _ => {
            let path = args.model.clone().ok_or_else(|| CliError::validation("--model: required by the onnx backend"))?;
            let id = args.model_id.clone().unwrap_or_else(|| {
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
            });
            ModelSpec::Onnx { id, path, tokenizer: args.tokenizer.clone() }
        }
    };
    Ok(Some(spec))
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn read_scores(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Convert(a) => commands::convert(&a.input, a.in_format, a.split, cli.out.as_deref(), stdout),
        Command::Predict(a) => {
            if let Some(spec) = command_line_model(&a)? {
                cfg.models = vec![spec];
            }
            if let Some(split) = a.split {
                cfg.split = split;
            }
            if let Some(m) = a.max_subtokens {
                cfg.max_subtokens = m;
            }
            cfg.allow_custom_length |= a.allow_custom_length;
            if let Some(agg) = a.aggregation {
                cfg.aggregation = agg;
            }
            if a.no_distributions {
                cfg.write_distributions = false;
            }
            commands::predict(&cfg, a.input.as_deref(), &out_dir(&cfg), stdout).map(drop)
        }
        Command::Ensemble(a) => {
            let dir = out_dir(&cfg);
            let ens = cfg.ensemble.clone();
            let files = if a.files.is_empty() {
                let ens = ens
                    .as_ref()
                    .ok_or_else(|| CliError::validation("ensemble: no prediction files and no ensemble.member_ids in config"))?;
                ens.member_ids.iter().map(|id| commands::predictions_path(&dir, id)).collect()
            } else {
                a.files.clone()
            };
            let select = match &a.select {
                Some(p) => Some((read_scores(p)?, a.k.or(ens.as_ref().map(|e| e.selection_k)).unwrap_or(3))),
                None => None,
            };
            let opts = EnsembleOptions {
                tie_policy: a.tie_policy.or(ens.as_ref().map(|e| e.tie_policy)).unwrap_or_default(),
                tallies: a.tallies,
                select,
            };
            commands::ensemble(&files, &opts, &dir, stdout).map(drop)
        }
        Command::Evaluate(a) => {
            cfg.validate()?;
            let split = a.split.unwrap_or(cfg.split);
            let gold = commands::resolve_dataset(&cfg, a.gold.as_deref(), split, "gold dataset")?;
            let labels = cfg.labels()?;
            commands::evaluate(&gold, &a.pred, a.policy, &labels, cfg.output_dir.as_deref(), stdout).map(drop)
        }
        Command::Ablate(a) => commands::ablate(&a.records, a.bold, a.format, cfg.output_dir.as_deref(), stdout).map(drop),
        Command::Report(a) => {
            let labels = cfg.labels()?;
            let split = a.split.unwrap_or(cfg.split);
            let gold = match &a.gold {
                Some(p) => Some(fsio::load_dataset(p, split)?),
                None => None,
            };
            commands::report(&a.pred, gold.as_ref(), &labels, a.json, stdout).map(drop)
        }
    }
}
