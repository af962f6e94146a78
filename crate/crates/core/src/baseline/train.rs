//! Mini-batch SGD with per-epoch model selection on validation micro-F1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::model::{
    bce_loss, cell_loss_and_slope, predict_featurized, LinearModel, Sample, TrainConfig,
};
use crate::corpus::{Example, LabelVocabulary};
use crate::error::{Error, Result};
use crate::metrics::{confusion, micro_f1};
use crate::prediction::PredictionRecord;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Full training objective after the epoch.
    pub train_loss: f64,
    pub valid_micro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters of the best epoch (the initial zero model when `epochs == 0`).
    pub model: LinearModel<T>,
    /// 0 when no epoch ran.
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

pub(crate) fn featurize_split<T: Real>(
    examples: &[Example],
    vocab: &LabelVocabulary,
    config: &TrainConfig,
) -> Result<Vec<Sample<T>>> {
    let hasher = config.hasher()?;
    examples
        .iter()
        .map(|e| Ok((hasher.featurize(&e.text), vocab.encode(&e.labels)?)))
        .collect()
}

fn valid_micro_f1<T: Real>(
    model: &LinearModel<T>,
    valid: &[Example],
    features: &[FeatureVector<T>],
) -> Result<f64> {
    let ids: Vec<&str> = valid.iter().map(|e| e.id.as_str()).collect();
    let preds: Vec<PredictionRecord> = predict_featurized(model, &ids, features)
        .into_iter()
        .map(|p| PredictionRecord::new(p.id, p.labels))
        .collect();
    let counts = confusion(valid, &preds, None)?;
    Ok(micro_f1::<f64>(&counts))
}

/// Scratch space for sparse batch updates: a dense gradient buffer that is
/// cleared only at the columns a batch touched.
struct Scratch<T> {
    grad: Vec<T>,
    bias: Vec<T>,
    touched: Vec<usize>,
}

fn sgd_step<T: Real>(model: &mut LinearModel<T>, batch: &[&Sample<T>], scratch: &mut Scratch<T>) {
    let l_count = model.n_labels();
    let dim = model.dim();
    let cells = T::from_count(batch.len() * l_count);
    let lr = T::lit(model.config.learning_rate);
    let decay = T::one() - T::lit(2.0 * model.config.learning_rate * model.config.l2);

    for (x, y) in batch {
        let z = model.logits(x);
        for (l, &zl) in z.iter().enumerate() {
            let g = cell_loss_and_slope(zl, y.get(l)).1 / cells;
            scratch.bias[l] = scratch.bias[l] + g;
            let row = l * dim;
            for &(j, v) in x.entries() {
                let k = row + j as usize;
                scratch.grad[k] = scratch.grad[k] + g * v;
            }
        }
        scratch
            .touched
            .extend(x.entries().iter().map(|&(j, _)| j as usize));
    }
    scratch.touched.sort_unstable();
    scratch.touched.dedup();

    // W <- W - lr (g + 2 l2 W) = (1 - 2 lr l2) W - lr g
    if model.config.l2 != 0.0 {
        for w in &mut model.weights {
            *w = *w * decay;
        }
    }
    for l in 0..l_count {
        let row = l * dim;
        for &j in &scratch.touched {
            let k = row + j;
            model.weights[k] = model.weights[k] - lr * scratch.grad[k];
            scratch.grad[k] = T::zero();
        }
        model.bias[l] = model.bias[l] - lr * scratch.bias[l];
        scratch.bias[l] = T::zero();
    }
    scratch.touched.clear();
}

pub fn train<T: Real>(
    train: &[Example],
    valid: &[Example],
    vocab: &LabelVocabulary,
    config: TrainConfig,
) -> Result<TrainOutcome<T>> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("training split".into()));
    }
    if valid.is_empty() {
        return Err(Error::EmptyDataset("validation split".into()));
    }
    config.validate()?;

    let train_samples: Vec<Sample<T>> = featurize_split(train, vocab, &config)?;
    let valid_features: Vec<FeatureVector<T>> = featurize_split::<T>(valid, vocab, &config)?
        .into_iter()
        .map(|(x, _)| x)
        .collect();

    let mut model = LinearModel::zeros(vocab, config);
    let mut best = model.clone();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut history = Vec::with_capacity(config.epochs);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_samples.len()).collect();
    let mut scratch = Scratch {
        grad: vec![T::zero(); model.weights.len()],
        bias: vec![T::zero(); model.n_labels()],
        touched: Vec::new(),
    };

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Sample<T>> = chunk.iter().map(|&i| &train_samples[i]).collect();
            sgd_step(&mut model, &batch, &mut scratch);
        }
        if !model.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "training diverged at epoch {epoch}; lower the learning rate"
            )));
        }
        let f1 = valid_micro_f1(&model, valid, &valid_features)?;
        let loss = bce_loss(&model, &train_samples)?.to_f64_lossy();
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            valid_micro_f1: f1,
        });
        if f1 > best_f1 {
            best_f1 = f1;
            best_epoch = epoch;
            best.clone_from(&model);
        }
    }

    Ok(TrainOutcome {
        model: best,
        best_epoch,
        history,
    })
}
