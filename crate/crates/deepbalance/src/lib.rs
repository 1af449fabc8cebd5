//! Ensembles of deep belief networks for highly imbalanced binary
//! classification.
//!
//! Each ensemble member is a deep belief network trained on a *balanced
//! bootstrap* (every minority row plus an equal number of majority rows drawn
//! with replacement) restricted to a random subset of `mtry` features. Member
//! probabilities are averaged into one score.
//!
//! The crate also carries the pieces needed to compare that ensemble with
//! classic resampling baselines: random under- and over-sampling, SMOTE,
//! stratified splitting, and threshold/ROC metrics.
//!
//! ```no_run
//! use deepbalance::data::{generate_synthetic, stratified_split, SyntheticParams};
//! use deepbalance::ensemble::{predict, train_deepbalance, TrainConfig};
//! use deepbalance::metrics::evaluate;
//! use deepbalance::numerics::derive_stream;
//!
//! let ds = generate_synthetic(&SyntheticParams::standard(1)).unwrap();
//! let split = stratified_split(&ds, 0.7, &mut derive_stream(1, deepbalance::SPLIT_STREAM)).unwrap();
//! let model = train_deepbalance(&split.train, &TrainConfig::deepbalance(5, 25, 50, 1), 4).unwrap();
//! let scores = predict(&model, split.test.features()).unwrap();
//! let eval = evaluate(&scores, split.test.labels(), 0.5).unwrap();
//! println!("AUC {:.4}", eval.auc);
//! ```

pub mod data;
pub mod dbn;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod numerics;
pub mod resampling;

pub use error::{Error, Result};

/// Stream id reserved for train/test splitting.
pub const SPLIT_STREAM: u64 = u64::MAX;
/// Stream id reserved for the synthetic data generator.
pub const SYNTHETIC_STREAM: u64 = u64::MAX - 1;
/// Stream id reserved for capping the majority class of a loaded dataset.
pub const SUBSAMPLE_STREAM: u64 = u64::MAX - 2;
