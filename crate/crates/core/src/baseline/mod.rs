//! Hashed character n-gram features with a one-vs-rest logistic model
//! trained under binary cross-entropy.

mod features;
mod format;
mod model;
mod train;

pub use features::{featurize, fnv1a64, FeatureHasher, FeatureVector};
pub use format::{decode_model, encode_model, load_model, save_model, MODEL_FORMAT_VERSION};
pub use model::{
    bce_loss, bce_loss_and_grad, decide, predict, predict_featurized, Gradient, LinearModel,
    Sample, ScoredPrediction, TrainConfig,
};
pub use train::{train, EpochRecord, TrainOutcome};
