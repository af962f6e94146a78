//! End-to-end run: preprocess -> (oversample) -> train -> predict -> vote ->
//! score -> stats, driven by a TOML config.
//!
//! Every artifact goes under `output_dir` and is listed, with its SHA-256, in
//! `manifest.json` together with the config hash and toolkit version. Nothing
//! time- or host-dependent is recorded, so identical configs give
//! byte-identical output trees. If a stage fails, the files written by the
//! run so far are removed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{self, TrainConfig};
use crate::corpus::{self, Example, LabelVocabulary};
use crate::ensemble::{self, Fallback};
use crate::error::{Error, Result};
use crate::imbalance;
use crate::metrics::{self, ReportOptions, ScoreReport};
use crate::prediction::{self, PredictionRecord, PredictionSet};
use crate::preprocess::{self, NormalizeOptions};
use crate::{fsio, MANIFEST_FORMAT_VERSION, TOOLKIT_VERSION};

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("run-output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default)]
    pub drop_hashtag_body: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            enabled: true,
            drop_hashtag_body: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OversampleSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_clip")]
    pub clip: u64,
}

fn default_clip() -> u64 {
    imbalance::DEFAULT_CLIP
}

impl Default for OversampleSection {
    fn default() -> Self {
        Self {
            enabled: false,
            clip: imbalance::DEFAULT_CLIP,
        }
    }
}

/// Baseline hyperparameters; unset fields take [`TrainConfig::default`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    /// Number of models to train; seeds are `seed, seed + 1, ...` unless
    /// `seeds` lists them explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngram_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngram_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Extra prediction files (e.g. from transformer runs) voted alongside
    /// the baseline models.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_votes: Option<usize>,
    #[serde(default)]
    pub fallback: Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub labels: PathBuf,
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
    /// Not part of the config hash or the manifest copy of the config.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub oversample: OversampleSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    /// Directory relative paths are resolved against; the config file's
    /// directory when loaded from disk.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fsio::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::from_toml(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        let b = &self.baseline;
        TrainConfig {
            dim: b.dim.unwrap_or(d.dim),
            ngram_min: b.ngram_min.unwrap_or(d.ngram_min),
            ngram_max: b.ngram_max.unwrap_or(d.ngram_max),
            seed: self.seed,
            learning_rate: b.learning_rate.unwrap_or(d.learning_rate),
            epochs: b.epochs.unwrap_or(d.epochs),
            l2: b.l2.unwrap_or(d.l2),
            threshold: b.threshold.unwrap_or(d.threshold),
            batch_size: b.batch_size.unwrap_or(d.batch_size),
        }
    }

    pub fn model_seeds(&self) -> Vec<u64> {
        match &self.baseline.seeds {
            Some(s) => s.clone(),
            None => {
                let n = self.baseline.variants.unwrap_or(1) as u64;
                (0..n).map(|i| self.seed.wrapping_add(i)).collect()
            }
        }
    }

    /// SHA-256 of the canonical JSON form (input paths as written, overrides
    /// applied, output directory excluded).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Checks every precondition that can be checked without running a stage.
    pub fn validate(&self) -> Result<LabelVocabulary> {
        let mut inputs: Vec<(&str, &PathBuf)> = vec![
            ("labels", &self.labels),
            ("train", &self.train),
            ("valid", &self.valid),
            ("test", &self.test),
        ];
        inputs.extend(self.ensemble.inputs.iter().map(|p| ("ensemble input", p)));
        for (what, p) in inputs {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(Error::Config(format!(
                    "{what} file {} does not exist",
                    full.display()
                )));
            }
        }
        let vocab = LabelVocabulary::load(&self.resolve(&self.labels))
            .map_err(|e| Error::Config(format!("labels: {e}")))?;
        self.train_config()
            .validate()
            .map_err(|e| Error::Config(format!("baseline: {e}")))?;
        if self.oversample.clip < 1 {
            return Err(Error::Config("oversample.clip must be >= 1".into()));
        }
        let n_models = self.model_seeds().len() + self.ensemble.inputs.len();
        if n_models == 0 {
            return Err(Error::Config(
                "nothing to vote on: no baseline variants and no inputs".into(),
            ));
        }
        if let Some(t) = self.ensemble.threshold_votes {
            if t == 0 || t > n_models {
                return Err(Error::Config(format!(
                    "ensemble.threshold_votes must be in 1..={n_models}, got {t}"
                )));
            }
        }
        Ok(vocab)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub toolkit_version: String,
    pub manifest_format: u32,
    pub model_format: u32,
    pub config_sha256: String,
    pub config: RunConfig,
    pub stages: Vec<String>,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteSummary {
    pub inputs: Vec<String>,
    pub k: usize,
    pub threshold_votes: usize,
    pub fallback: Fallback,
    pub empty_outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScores {
    pub models: BTreeMap<String, ScoreReport>,
    pub ensemble: ScoreReport,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    pub scores: RunScores,
}

struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
    entries: Vec<ArtifactEntry>,
}

impl Artifacts {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let full = self.root.join(rel);
        fsio::write_atomic(&full, bytes)?;
        self.written.push(full.clone());
        self.entries.push(ArtifactEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(full)
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    fn remove_all(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary> {
    let vocab = config.validate()?;
    let mut art = Artifacts {
        root: config.resolve(&config.output_dir),
        written: Vec::new(),
        entries: Vec::new(),
    };
    match run_stages(config, &vocab, &mut art) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            art.remove_all();
            Err(e)
        }
    }
}

fn run_stages(
    config: &RunConfig,
    vocab: &LabelVocabulary,
    art: &mut Artifacts,
) -> Result<RunSummary> {
    let mut stages = Vec::new();
    let load = |p: &PathBuf| corpus::load_any(&config.resolve(p), Some(vocab), true);

    let (mut train, mut valid, mut test) = stage(
        "load",
        (|| {
            Ok((
                load(&config.train)?,
                load(&config.valid)?,
                load(&config.test)?,
            ))
        })(),
    )?;

    if config.preprocess.enabled {
        stage(
            "preprocess",
            (|| {
                let opts = NormalizeOptions {
                    drop_hashtag_body: config.preprocess.drop_hashtag_body,
                };
                let mut reports = BTreeMap::new();
                for (name, split) in [
                    ("train", &mut train),
                    ("valid", &mut valid),
                    ("test", &mut test),
                ] {
                    let (normalized, report) = preprocess::normalize_examples(split, opts);
                    art.write(
                        &format!("normalized/{name}.jsonl"),
                        &corpus::to_jsonl(&normalized)?,
                    )?;
                    reports.insert(name, report);
                    *split = normalized;
                }
                art.write_json("normalized/report.json", &reports)?;
                Ok(())
            })(),
        )?;
        stages.push("preprocess");
    }

    if config.oversample.enabled {
        train = stage(
            "oversample",
            (|| {
                let plan = imbalance::plan_oversample(&train, config.oversample.clip)?;
                let expanded = imbalance::materialize(&train, &plan)?;
                art.write_json("oversample/plan.json", &plan)?;
                art.write("oversample/train.jsonl", &corpus::to_jsonl(&expanded)?)?;
                Ok(expanded)
            })(),
        )?;
        stages.push("oversample");
    }

    let seeds = config.model_seeds();
    let mut models = Vec::with_capacity(seeds.len());
    stage(
        "train",
        (|| {
            for (i, &seed) in seeds.iter().enumerate() {
                let cfg = TrainConfig {
                    seed,
                    ..config.train_config()
                };
                let outcome = baseline::train::<f64>(&train, &valid, vocab, cfg)?;
                art.write(
                    &format!("models/model_{i}.bin"),
                    &baseline::encode_model(&outcome.model)?,
                )?;
                art.write_json(
                    &format!("models/model_{i}.history.json"),
                    &serde_json::json!({
                        "seed": seed,
                        "best_epoch": outcome.best_epoch,
                        "epochs": outcome.history,
                    }),
                )?;
                models.push(outcome.model);
            }
            Ok(())
        })(),
    )?;
    stages.push("train");

    let mut named_preds: Vec<(String, PredictionSet)> = Vec::new();
    stage(
        "predict",
        (|| {
            for (i, model) in models.iter().enumerate() {
                let preds: PredictionSet = baseline::predict(model, vocab, &test)?
                    .iter()
                    .map(|p| p.to_record(&model.labels))
                    .collect();
                let name = format!("model_{i}");
                art.write(
                    &format!("predictions/{name}.jsonl"),
                    &prediction::to_jsonl(&preds)?,
                )?;
                named_preds.push((name, preds));
            }
            for p in &config.ensemble.inputs {
                let preds = prediction::load_predictions(&config.resolve(p), Some(vocab))?;
                named_preds.push((p.display().to_string(), preds));
            }
            Ok(())
        })(),
    )?;
    stages.push("predict");

    let ensemble_preds: Vec<PredictionRecord> = stage(
        "vote",
        (|| {
            let sets: Vec<PredictionSet> = named_preds.iter().map(|(_, p)| p.clone()).collect();
            let outcome = ensemble::vote_with_fallback(
                &sets,
                config.ensemble.threshold_votes,
                config.ensemble.fallback,
                Some(vocab),
            )?;
            art.write(
                "predictions/ensemble.jsonl",
                &prediction::to_jsonl(&outcome.predictions)?,
            )?;
            art.write_json(
                "predictions/ensemble.summary.json",
                &VoteSummary {
                    inputs: named_preds.iter().map(|(n, _)| n.clone()).collect(),
                    k: outcome.tally.k,
                    threshold_votes: outcome.threshold_votes,
                    fallback: config.ensemble.fallback,
                    empty_outputs: outcome.empty_outputs,
                },
            )?;
            Ok(outcome.predictions)
        })(),
    )?;
    stages.push("vote");

    let scores = stage(
        "score",
        (|| {
            let opts = ReportOptions {
                percent: false,
                per_label: true,
            };
            let mut by_model = BTreeMap::new();
            for (name, preds) in &named_preds {
                let c = metrics::confusion(&test, preds, Some(vocab))?;
                by_model.insert(name.clone(), ScoreReport::new(&c, opts));
            }
            let c = metrics::confusion(&test, &ensemble_preds, Some(vocab))?;
            let scores = RunScores {
                models: by_model,
                ensemble: ScoreReport::new(&c, opts),
            };
            art.write_json("scores.json", &scores)?;
            Ok(scores)
        })(),
    )?;
    stages.push("score");

    stage(
        "stats",
        (|| {
            let stats: BTreeMap<&str, corpus::DatasetStats> = [
                ("train", corpus::compute_stats(&train)),
                ("valid", corpus::compute_stats(&valid)),
                ("test", corpus::compute_stats(&test)),
            ]
            .into();
            art.write_json("stats.json", &stats)?;
            Ok(())
        })(),
    )?;
    stages.push("stats");

    let manifest = Manifest {
        toolkit: "propvote".into(),
        toolkit_version: TOOLKIT_VERSION.into(),
        manifest_format: MANIFEST_FORMAT_VERSION,
        model_format: baseline::MODEL_FORMAT_VERSION,
        config_sha256: config.hash(),
        config: config.clone(),
        stages: stages.iter().map(|s| s.to_string()).collect(),
        artifacts: art.entries.clone(),
    };
    let manifest_path = stage("manifest", art.write_json("manifest.json", &manifest))?;
    Ok(RunSummary {
        manifest_path,
        manifest,
        scores,
    })
}

/// Loads gold data for the `stats` command; an empty file is an error.
pub fn stats_command(path: &Path, vocab: Option<&LabelVocabulary>) -> Result<corpus::DatasetStats> {
    let ds: Vec<Example> = corpus::load_any(path, vocab, true)?;
    if ds.is_empty() {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: "no records".into(),
        });
    }
    Ok(corpus::compute_stats(&ds))
}
