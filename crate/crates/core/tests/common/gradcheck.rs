use propvote::baseline::{bce_loss_and_grad, FeatureVector, LinearModel, Sample, TrainConfig};
use propvote::corpus::{LabelVocabulary, MultiHot};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_problem(
    rng: &mut ChaCha8Rng,
    l: usize,
    d: usize,
) -> (LinearModel<f64>, Vec<Sample<f64>>) {
    let vocab = LabelVocabulary::new((0..l).map(|i| format!("L{i}"))).unwrap();
    let config = TrainConfig {
        dim: d,
        l2: rng.gen_range(0.0..0.1),
        ..TrainConfig::default()
    };
    let mut model = LinearModel::zeros(&vocab, config);
    for w in &mut model.weights {
        *w = rng.gen_range(-1.0..1.0);
    }
    for b in &mut model.bias {
        *b = rng.gen_range(-1.0..1.0);
    }
    let batch = (0..rng.gen_range(1..6))
        .map(|_| {
            let nnz = rng.gen_range(0..d);
            let pairs = (0..nnz).map(|_| (rng.gen_range(0..d as u32), rng.gen_range(-1.0..1.0)));
            let x = FeatureVector::from_pairs(d, pairs).unwrap();
            let y = MultiHot::from_bits((0..l).map(|_| rng.gen_bool(0.4)).collect());
            (x, y)
        })
        .collect();
    (model, batch)
}

/// Central differences with step 1e-5; relative error uses
/// max(|a|, |n|, 1e-8) as the scale so near-zero entries compare absolutely.
pub fn max_relative_error(model: &LinearModel<f64>, batch: &[Sample<f64>]) -> f64 {
    let h = 1e-5;
    let (_, grad) = bce_loss_and_grad(model, batch).unwrap();
    let loss_at = |m: &LinearModel<f64>| bce_loss_and_grad(m, batch).unwrap().0;
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, plus: LinearModel<f64>, minus: LinearModel<f64>| {
        let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
        let scale = analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / scale);
    };
    for k in 0..model.weights.len() {
        let (mut p, mut m) = (model.clone(), model.clone());
        p.weights[k] += h;
        m.weights[k] -= h;
        check(grad.weights[k], p, m);
    }
    for k in 0..model.bias.len() {
        let (mut p, mut m) = (model.clone(), model.clone());
        p.bias[k] += h;
        m.bias[k] -= h;
        check(grad.bias[k], p, m);
    }
    worst
}
