//! Prediction JSONL: `{"id": "...", "labels": [...], "scores": {label: p}?}`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelVocabulary, Labeled};
use crate::error::{Error, Result};
use crate::fsio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub id: String,
    pub labels: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<String, f64>>,
}

impl PredictionRecord {
    pub fn new<I, S>(id: impl Into<String>, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            scores: None,
        }
    }
}

impl Labeled for PredictionRecord {
    fn id(&self) -> &str {
        &self.id
    }

    fn label_set(&self) -> &BTreeSet<String> {
        &self.labels
    }
}

/// Predictions of one model, in file order.
pub type PredictionSet = Vec<PredictionRecord>;

/// Reads a prediction file. Empty label sets are allowed; ids must be unique.
pub fn load_predictions(path: &Path, vocab: Option<&LabelVocabulary>) -> Result<PredictionSet> {
    let raw = fsio::read_to_string(path)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId {
                id: rec.id,
                line: Some(i + 1),
            });
        }
        if let Some(vocab) = vocab {
            if let Some(bad) = rec.labels.iter().find(|l| !vocab.contains(l)) {
                return Err(Error::UnknownLabel {
                    label: bad.clone(),
                    line: Some(i + 1),
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn to_jsonl(preds: &[PredictionRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for p in preds {
        serde_json::to_writer(&mut buf, p)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn write_predictions(path: &Path, preds: &[PredictionRecord]) -> Result<()> {
    fsio::write_atomic(path, &to_jsonl(preds)?)
}

/// Compares the id sets of two collections, reporting ids present only on
/// one side. Duplicate ids on either side are an error.
pub fn check_same_ids<A: Labeled, B: Labeled>(reference: &[A], other: &[B]) -> Result<()> {
    let mut left = HashSet::new();
    for r in reference {
        if !left.insert(r.id()) {
            return Err(Error::DuplicateId {
                id: r.id().to_string(),
                line: None,
            });
        }
    }
    let mut right = HashSet::new();
    for r in other {
        if !right.insert(r.id()) {
            return Err(Error::DuplicateId {
                id: r.id().to_string(),
                line: None,
            });
        }
    }
    if left == right {
        return Ok(());
    }
    let mut missing: Vec<String> = left.difference(&right).map(|s| s.to_string()).collect();
    let mut extra: Vec<String> = right.difference(&left).map(|s| s.to_string()).collect();
    missing.sort();
    extra.sort();
    Err(Error::IdMismatch { missing, extra })
}
