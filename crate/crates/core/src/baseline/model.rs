//! One-vs-rest linear model over hashed features, its binary cross-entropy
//! objective and the thresholded decision rule.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::features::{FeatureHasher, FeatureVector};
use crate::corpus::{Example, LabelVocabulary, MultiHot};
use crate::error::{Error, Result};
use crate::prediction::PredictionRecord;
use crate::scalar::{sigmoid, Real};

/// Hyperparameters. Stored with the model so predictions can re-featurize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub threshold: f64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 1 << 18,
            ngram_min: 2,
            ngram_max: 5,
            seed: 0,
            learning_rate: 0.1,
            epochs: 30,
            l2: 1e-4,
            threshold: 0.5,
            batch_size: 16,
        }
    }
}

impl TrainConfig {
    pub fn hasher(&self) -> Result<FeatureHasher> {
        FeatureHasher::new(self.dim, self.ngram_min, self.ngram_max)
    }

    pub fn validate(&self) -> Result<()> {
        self.hasher()?;
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be non-negative, got {}", self.l2));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!(
                "threshold must be in [0, 1], got {}",
                self.threshold
            ));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }
}

/// `L x D` weights (row-major, one row per label) plus `L` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub config: TrainConfig,
    pub labels: Vec<String>,
    pub vocab_hash: String,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// One labeled, featurized training row.
pub type Sample<T> = (FeatureVector<T>, MultiHot);

impl<T: Real> LinearModel<T> {
    pub fn zeros(vocab: &LabelVocabulary, config: TrainConfig) -> Self {
        let l = vocab.len();
        Self {
            config,
            labels: vocab.labels().to_vec(),
            vocab_hash: vocab.fingerprint(),
            weights: vec![T::zero(); l * config.dim],
            bias: vec![T::zero(); l],
        }
    }

    pub fn n_labels(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Vocabulary rebuilt from the stored label names.
    pub fn vocabulary(&self) -> Result<LabelVocabulary> {
        LabelVocabulary::new(self.labels.iter().cloned())
    }

    pub fn check_vocabulary(&self, vocab: &LabelVocabulary) -> Result<()> {
        let found = vocab.fingerprint();
        if found != self.vocab_hash {
            return Err(Error::VocabularyMismatch {
                expected: self.vocab_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    pub fn logits(&self, x: &FeatureVector<T>) -> Vec<T> {
        (0..self.n_labels())
            .map(|l| x.dot_row(&self.weights, l) + self.bias[l])
            .collect()
    }

    pub fn probabilities(&self, x: &FeatureVector<T>) -> Vec<T> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }

    pub fn weight_norm_sq(&self) -> T {
        self.weights.iter().map(|&w| w * w).sum()
    }

    fn check_sample(&self, x: &FeatureVector<T>, y: &MultiHot) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "feature dimension {} vs model dimension {}",
                x.dim(),
                self.dim()
            )));
        }
        if y.len() != self.n_labels() {
            return Err(Error::ShapeMismatch(format!(
                "target length {} vs {} labels",
                y.len(),
                self.n_labels()
            )));
        }
        Ok(())
    }
}

/// Clamped per-cell binary cross-entropy and its derivative with respect to
/// the logit. Where the probability is clamped the loss is locally constant,
/// so the derivative there is zero.
pub(crate) fn cell_loss_and_slope<T: Real>(z: T, y: bool) -> (T, T) {
    let eps = T::prob_clamp();
    let p = sigmoid(z);
    let clamped = p < eps || p > T::one() - eps;
    let pc = p.max(eps).min(T::one() - eps);
    let target = if y { T::one() } else { T::zero() };
    let loss = if y { -pc.ln() } else { -(T::one() - pc).ln() };
    let slope = if clamped { T::zero() } else { p - target };
    (loss, slope)
}

/// Mean binary cross-entropy over all (example, label) cells plus
/// `l2 * ||W||^2`, with its exact gradient.
pub fn bce_loss_and_grad<T: Real>(
    model: &LinearModel<T>,
    batch: &[Sample<T>],
) -> Result<(T, Gradient<T>)> {
    if batch.is_empty() {
        return Err(Error::ShapeMismatch("empty batch".into()));
    }
    let l_count = model.n_labels();
    let dim = model.dim();
    let cells = T::from_count(batch.len() * l_count);
    let l2 = T::lit(model.config.l2);

    let mut grad = Gradient {
        weights: vec![T::zero(); l_count * dim],
        bias: vec![T::zero(); l_count],
    };
    let mut data_loss = T::zero();
    for (x, y) in batch {
        model.check_sample(x, y)?;
        for (l, z) in model.logits(x).into_iter().enumerate() {
            let (loss, slope) = cell_loss_and_slope(z, y.get(l));
            data_loss = data_loss + loss;
            let g = slope / cells;
            grad.bias[l] = grad.bias[l] + g;
            let row = l * dim;
            for &(j, v) in x.entries() {
                let k = row + j as usize;
                grad.weights[k] = grad.weights[k] + g * v;
            }
        }
    }
    let two_l2 = T::lit(2.0) * l2;
    for (g, &w) in grad.weights.iter_mut().zip(&model.weights) {
        *g = *g + two_l2 * w;
    }
    let loss = data_loss / cells + l2 * model.weight_norm_sq();
    Ok((loss, grad))
}

/// Objective value only; same definition as [`bce_loss_and_grad`].
pub fn bce_loss<T: Real>(model: &LinearModel<T>, batch: &[Sample<T>]) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::ShapeMismatch("empty batch".into()));
    }
    let cells = T::from_count(batch.len() * model.n_labels());
    let mut data_loss = T::zero();
    for (x, y) in batch {
        model.check_sample(x, y)?;
        for (l, z) in model.logits(x).into_iter().enumerate() {
            data_loss = data_loss + cell_loss_and_slope(z, y.get(l)).0;
        }
    }
    Ok(data_loss / cells + T::lit(model.config.l2) * model.weight_norm_sq())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPrediction<T> {
    pub id: String,
    /// Per-label probability, in vocabulary order.
    pub scores: Vec<T>,
    pub labels: BTreeSet<String>,
}

impl<T: Real> ScoredPrediction<T> {
    pub fn to_record(&self, label_names: &[String]) -> PredictionRecord {
        let scores: BTreeMap<String, f64> = label_names
            .iter()
            .zip(&self.scores)
            .map(|(l, &p)| (l.clone(), p.to_f64_lossy()))
            .collect();
        PredictionRecord {
            id: self.id.clone(),
            labels: self.labels.clone(),
            scores: Some(scores),
        }
    }
}

/// Labels with probability `>= threshold`; if none qualifies, the single
/// highest-scoring label (lowest index on ties).
pub fn decide<T: Real>(probs: &[T], threshold: T) -> Vec<usize> {
    let chosen: Vec<usize> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= threshold)
        .map(|(i, _)| i)
        .collect();
    if !chosen.is_empty() || probs.is_empty() {
        return chosen;
    }
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    vec![best]
}

pub fn predict_featurized<T: Real>(
    model: &LinearModel<T>,
    ids: &[&str],
    features: &[FeatureVector<T>],
) -> Vec<ScoredPrediction<T>> {
    let threshold = T::lit(model.config.threshold);
    ids.iter()
        .zip(features)
        .map(|(id, x)| {
            let scores = model.probabilities(x);
            let labels = decide(&scores, threshold)
                .into_iter()
                .map(|i| model.labels[i].clone())
                .collect();
            ScoredPrediction {
                id: id.to_string(),
                scores,
                labels,
            }
        })
        .collect()
}

pub fn predict<T: Real>(
    model: &LinearModel<T>,
    vocab: &LabelVocabulary,
    dataset: &[Example],
) -> Result<Vec<ScoredPrediction<T>>> {
    model.check_vocabulary(vocab)?;
    let hasher = model.config.hasher()?;
    let features: Vec<FeatureVector<T>> =
        dataset.iter().map(|e| hasher.featurize(&e.text)).collect();
    let ids: Vec<&str> = dataset.iter().map(|e| e.id.as_str()).collect();
    Ok(predict_featurized(model, &ids, &features))
}
