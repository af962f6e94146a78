use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use propvote::baseline::{self, TrainConfig};
use propvote::corpus::{self, LabelVocabulary};
use propvote::ensemble::{self, Fallback};
use propvote::metrics::{self, ReportOptions, ScoreReport};
use propvote::pipeline::{self, RunConfig, VoteSummary};
use propvote::prediction::{self, PredictionSet};
use propvote::preprocess::{self, NormalizeOptions};
use propvote::{fsio, imbalance};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (model format 1, manifest format 1)"
);

#[derive(Parser)]
#[command(
    name = "propvote",
    version = LONG_VERSION,
    about = "Multi-label tweet classification: preprocess, oversample, train, vote, score"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize tweet text (links, mentions, hashtags, underscores).
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Remove hashtags entirely instead of keeping the tag text.
        #[arg(long)]
        drop_hashtag_body: bool,
    },
    /// Label counts and labels-per-example histogram of a gold dataset.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Duplicate examples whose labels are all rarer than average.
    Oversample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = imbalance::DEFAULT_CLIP)]
        clip: u64,
        #[arg(long)]
        plan_out: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Train a hashed n-gram logistic baseline.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        valid: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        /// Per-epoch loss and validation micro-F1 as JSON.
        #[arg(long)]
        history_out: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Apply a trained baseline to a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Check the model against this labels file.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Combine prediction files by majority vote.
    Vote {
        #[arg(long, num_args = 1.., required = true)]
        preds: Vec<PathBuf>,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long)]
        threshold_votes: Option<usize>,
        #[arg(long, default_value = "none")]
        fallback: Fallback,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Micro/macro F1 of a prediction file against gold labels.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        percent: bool,
        #[arg(long)]
        per_label: bool,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Run the full pipeline from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        variants: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        clip: Option<u64>,
        #[arg(long)]
        oversample: bool,
        #[arg(long)]
        drop_hashtag_body: bool,
    },
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, env = "PROPVOTE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    ngram_min: Option<usize>,
    #[arg(long)]
    ngram_max: Option<usize>,
}

impl HyperArgs {
    fn to_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            dim: self.dim.unwrap_or(d.dim),
            ngram_min: self.ngram_min.unwrap_or(d.ngram_min),
            ngram_max: self.ngram_max.unwrap_or(d.ngram_max),
            seed: self.seed,
            learning_rate: self.lr.unwrap_or(d.learning_rate),
            epochs: self.epochs.unwrap_or(d.epochs),
            l2: self.l2.unwrap_or(d.l2),
            threshold: self.threshold.unwrap_or(d.threshold),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
        }
    }
}

fn load_vocab(path: Option<&Path>) -> Result<Option<LabelVocabulary>> {
    path.map(|p| {
        LabelVocabulary::load(p).with_context(|| format!("loading labels {}", p.display()))
    })
    .transpose()
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess {
            input,
            output,
            drop_hashtag_body,
        } => {
            let report = preprocess::normalize_dataset(
                &input,
                &output,
                NormalizeOptions { drop_hashtag_body },
            )?;
            print_json(&report)
        }
        Command::Stats {
            input,
            labels,
            output,
        } => {
            let vocab = load_vocab(labels.as_deref())?;
            let stats = pipeline::stats_command(&input, vocab.as_ref())?;
            if let Some(out) = output {
                fsio::write_json(&out, &stats)?;
            }
            print_json(&stats)
        }
        Command::Oversample {
            input,
            output,
            clip,
            plan_out,
            labels,
        } => {
            let vocab = load_vocab(labels.as_deref())?;
            let ds = corpus::load_any(&input, vocab.as_ref(), true)?;
            let plan = imbalance::plan_oversample(&ds, clip)?;
            let expanded = imbalance::materialize(&ds, &plan)?;
            corpus::write_dataset(&output, &expanded)?;
            if let Some(p) = plan_out {
                fsio::write_json(&p, &plan)?;
            }
            print_json(&serde_json::json!({
                "examples_before": ds.len(),
                "examples_after": expanded.len(),
                "average_count": plan.average_count,
                "label_counts_before": plan.label_counts_before,
                "label_counts_after": plan.label_counts_after,
            }))
        }
        Command::Train {
            train,
            valid,
            labels,
            model_out,
            history_out,
            hyper,
        } => {
            let vocab = LabelVocabulary::load(&labels)?;
            let train_ds = corpus::load_any(&train, Some(&vocab), true)?;
            let valid_ds = corpus::load_any(&valid, Some(&vocab), true)?;
            let outcome = baseline::train::<f64>(&train_ds, &valid_ds, &vocab, hyper.to_config())?;
            baseline::save_model(&model_out, &outcome.model)?;
            let summary = serde_json::json!({
                "best_epoch": outcome.best_epoch,
                "epochs": outcome.history,
            });
            if let Some(p) = history_out {
                fsio::write_json(&p, &summary)?;
            }
            let best = outcome
                .history
                .iter()
                .find(|r| r.epoch == outcome.best_epoch)
                .map(|r| r.valid_micro_f1);
            print_json(&serde_json::json!({
                "best_epoch": outcome.best_epoch,
                "valid_micro_f1": best,
            }))
        }
        Command::Predict {
            model,
            input,
            output,
            labels,
        } => {
            let model: baseline::LinearModel<f64> = baseline::load_model(&model)?;
            let vocab = match load_vocab(labels.as_deref())? {
                Some(v) => v,
                None => model.vocabulary()?,
            };
            let ds = corpus::load_any(&input, None, false)?;
            let preds: PredictionSet = baseline::predict(&model, &vocab, &ds)?
                .iter()
                .map(|p| p.to_record(&model.labels))
                .collect();
            prediction::write_predictions(&output, &preds)?;
            Ok(())
        }
        Command::Vote {
            preds,
            output,
            threshold_votes,
            fallback,
            labels,
        } => {
            let vocab = load_vocab(labels.as_deref())?;
            let sets = preds
                .iter()
                .map(|p| {
                    prediction::load_predictions(p, vocab.as_ref())
                        .with_context(|| format!("reading {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let outcome =
                ensemble::vote_with_fallback(&sets, threshold_votes, fallback, vocab.as_ref())?;
            prediction::write_predictions(&output, &outcome.predictions)?;
            if outcome.empty_outputs > 0 {
                eprintln!(
                    "warning: {} example(s) received no label by majority",
                    outcome.empty_outputs
                );
            }
            print_json(&VoteSummary {
                inputs: preds.iter().map(|p| p.display().to_string()).collect(),
                k: outcome.tally.k,
                threshold_votes: outcome.threshold_votes,
                fallback,
                empty_outputs: outcome.empty_outputs,
            })
        }
        Command::Score {
            gold,
            pred,
            percent,
            per_label,
            labels,
            output,
        } => {
            let vocab = load_vocab(labels.as_deref())?;
            let gold_ds = corpus::load_any(&gold, vocab.as_ref(), false)?;
            let preds = prediction::load_predictions(&pred, vocab.as_ref())?;
            let counts = metrics::confusion(&gold_ds, &preds, vocab.as_ref())?;
            let report = ScoreReport::new(&counts, ReportOptions { percent, per_label });
            if let Some(out) = output {
                fsio::write_json(&out, &report)?;
            }
            print_json(&report)
        }
        Command::Run {
            config,
            output_dir,
            variants,
            seed,
            epochs,
            lr,
            l2,
            dim,
            threshold,
            clip,
            oversample,
            drop_hashtag_body,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed.or_else(env_seed) {
                if seed.is_some() || !config_sets_seed(&config)? {
                    cfg.seed = s;
                }
            }
            if let Some(d) = output_dir {
                cfg.output_dir = std::env::current_dir()?.join(d);
            }
            let b = &mut cfg.baseline;
            b.variants = variants.or(b.variants);
            b.epochs = epochs.or(b.epochs);
            b.learning_rate = lr.or(b.learning_rate);
            b.l2 = l2.or(b.l2);
            b.dim = dim.or(b.dim);
            b.threshold = threshold.or(b.threshold);
            if let Some(c) = clip {
                cfg.oversample.clip = c;
            }
            cfg.oversample.enabled |= oversample;
            cfg.preprocess.drop_hashtag_body |= drop_hashtag_body;

            let summary = pipeline::run_pipeline(&cfg)?;
            print_json(&serde_json::json!({
                "manifest": summary.manifest_path,
                "config_sha256": summary.manifest.config_sha256,
                "ensemble_micro_f1": summary.scores.ensemble.micro_f1,
                "model_micro_f1": summary
                    .scores
                    .models
                    .iter()
                    .map(|(k, v)| (k.clone(), v.micro_f1))
                    .collect::<std::collections::BTreeMap<_, _>>(),
            }))
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("PROPVOTE_SEED").ok()?.parse().ok()
}

/// The environment seed is only a default: a seed written in the config file wins.
fn config_sets_seed(path: &Path) -> Result<bool> {
    let text = fsio::read_to_string(path)?;
    let table: toml::Table = text.parse().context("parsing config")?;
    Ok(table.contains_key("seed"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
