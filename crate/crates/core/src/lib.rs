//! Multi-label tweet classification toolkit.
//!
//! The pieces compose into a file-based pipeline: normalize tweets
//! ([`preprocess`]), inspect and rebalance label frequencies ([`corpus`],
//! [`imbalance`]), train hashed n-gram logistic baselines ([`baseline`]),
//! combine any number of prediction files by majority vote ([`ensemble`]) and
//! score them with pooled micro-F1 ([`metrics`]). [`pipeline`] runs the whole
//! chain from a config file.
//!
//! Numeric code is generic over [`Real`] (`f32` / `f64`); exact quantities
//! such as the oversampling average use [`Ratio`].

pub mod baseline;
pub mod corpus;
pub mod ensemble;
mod error;
pub mod fsio;
pub mod imbalance;
pub mod metrics;
pub mod pipeline;
pub mod prediction;
pub mod preprocess;
mod scalar;

pub use error::{Error, Result};
pub use num_rational::Ratio;
pub use scalar::{sigmoid, Real};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

pub type LinearModelF64 = baseline::LinearModel<f64>;
pub type LinearModelF32 = baseline::LinearModel<f32>;
pub type FeatureVectorF64 = baseline::FeatureVector<f64>;
pub type FeatureVectorF32 = baseline::FeatureVector<f32>;
pub type GradientF64 = baseline::Gradient<f64>;
/// Exact mean label count and exact micro-F1.
pub type ExactRatio = Ratio<u64>;
