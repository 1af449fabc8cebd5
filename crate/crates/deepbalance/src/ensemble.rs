//! DeepBalance: an ensemble of deep belief networks, each trained on a
//! balanced bootstrap of the training data restricted to a random subset of
//! the features.
//!
//! Member `m` draws everything it needs (bootstrap rows, feature subset,
//! weight initialisation, mini-batch order) from the stream `(seed, m)`, so
//! members can be trained on any number of threads and the result is the
//! same.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fit_standardizer, Dataset, StandardizationParams};
use crate::dbn::{squash, train_dbn, DbnHyperparams, DbnModel};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::resampling::{resample, ResampleMethod};

/// How member probabilities are combined into one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Arithmetic mean of member probabilities.
    #[default]
    Mean,
    /// Fraction of members whose probability is at least 0.5.
    MajorityVote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Features drawn (with replacement) per member.
    pub mtry: usize,
    pub total_nets: usize,
    /// Base-learner settings; `dbn.max_it` is the fine-tuning epoch count.
    pub dbn: DbnHyperparams,
    pub seed: u64,
    pub resample: ResampleMethod,
    pub use_feature_sampling: bool,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl TrainConfig {
    pub fn deepbalance(mtry: usize, total_nets: usize, max_it: usize, seed: u64) -> Self {
        Self {
            mtry,
            total_nets,
            dbn: DbnHyperparams {
                max_it,
                ..DbnHyperparams::default()
            },
            seed,
            resample: ResampleMethod::BalancedBootstrap,
            use_feature_sampling: true,
            aggregation: Aggregation::Mean,
        }
    }

    /// DeepBalance without feature sampling: every member sees all
    /// `n_features` features.
    pub fn all_features(n_features: usize, total_nets: usize, max_it: usize, seed: u64) -> Self {
        Self {
            use_feature_sampling: false,
            ..Self::deepbalance(n_features, total_nets, max_it, seed)
        }
    }

    pub fn max_it(&self) -> usize {
        self.dbn.max_it
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.mtry < 1 || self.mtry > n_features {
            return Err(Error::Config(format!(
                "mtry {} outside 1..={n_features}",
                self.mtry
            )));
        }
        if self.total_nets < 1 {
            return Err(Error::Config("total_nets must be at least 1".into()));
        }
        self.dbn.validate()?;
        self.resample.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub model: DbnModel,
    /// Sorted, distinct column indices into the full feature space.
    pub feature_indices: Vec<usize>,
    pub standardizer: StandardizationParams,
}

impl EnsembleMember {
    /// Member probabilities for rows of the full feature matrix.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        let sub = x.select_cols(&self.feature_indices);
        let input = squash(&self.standardizer.apply(&sub)?);
        self.model.predict_proba(&input)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub members: Vec<EnsembleMember>,
    pub feature_names: Vec<String>,
    pub config: TrainConfig,
}

pub const ENSEMBLE_FORMAT: &str = "deepbalance-ensemble";
pub const ENSEMBLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Bundle {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: EnsembleModel,
}

impl EnsembleModel {
    pub fn to_json(&self) -> Result<String> {
        let bundle = Bundle {
            format: ENSEMBLE_FORMAT.into(),
            version: ENSEMBLE_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&bundle).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: Bundle =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if bundle.format != ENSEMBLE_FORMAT {
            return Err(Error::Serialization(format!(
                "unexpected format '{}'",
                bundle.format
            )));
        }
        if bundle.version != ENSEMBLE_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported ensemble version {}",
                bundle.version
            )));
        }
        let model = bundle.model;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        if self.members.is_empty() {
            return Err(Error::Serialization("ensemble has no members".into()));
        }
        for m in &self.members {
            m.model.validate()?;
            if m.feature_indices.is_empty()
                || m.feature_indices.iter().any(|&j| j >= d)
                || m.feature_indices.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(Error::Serialization(
                    "invalid member feature indices".into(),
                ));
            }
            if m.standardizer.len() != m.feature_indices.len()
                || m.model.n_visible() != m.feature_indices.len()
            {
                return Err(Error::Serialization(
                    "member shapes do not match its features".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Draws `mtry` indices from `0..feature_count` uniformly with replacement,
/// then sorts and removes duplicates.
pub fn sample_features(
    feature_count: usize,
    mtry: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if mtry < 1 || mtry > feature_count {
        return Err(Error::Config(format!(
            "mtry {mtry} outside 1..={feature_count}"
        )));
    }
    let mut idx: Vec<usize> = (0..mtry).map(|_| rng.below(feature_count)).collect();
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

fn train_member(train: &Dataset, config: &TrainConfig, member: usize) -> Result<EnsembleMember> {
    let mut rng = RngStream::new(config.seed, member as u64);
    let sample = resample(train, &config.resample, &mut rng)?;
    let feature_indices = if config.use_feature_sampling {
        sample_features(train.n_features(), config.mtry, &mut rng)?
    } else {
        (0..train.n_features()).collect()
    };
    let x = sample.features().select_cols(&feature_indices);
    let standardizer = fit_standardizer(&x);
    let input = squash(&standardizer.apply(&x)?);
    let model = train_dbn(&config.dbn, &input, sample.labels(), &mut rng)?;
    Ok(EnsembleMember {
        model,
        feature_indices,
        standardizer,
    })
}

/// Trains `config.total_nets` members on a pool of `workers` threads.
/// The result does not depend on `workers`.
pub fn train_deepbalance(
    train: &Dataset,
    config: &TrainConfig,
    workers: usize,
) -> Result<EnsembleModel> {
    config.validate(train.n_features())?;
    if train.n_positive() == 0 || train.n_negative() == 0 {
        return Err(Error::Training(format!(
            "training data needs both classes ({} positive, {} negative)",
            train.n_positive(),
            train.n_negative()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Training(format!("cannot start worker pool: {e}")))?;
    let members = pool.install(|| {
        (0..config.total_nets)
            .into_par_iter()
            .map(|m| train_member(train, config, m))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(EnsembleModel {
        members,
        feature_names: train.feature_names().to_vec(),
        config: config.clone(),
    })
}

/// A single DBN on all features, trained after one application of `method`.
pub fn train_baseline(
    train: &Dataset,
    method: ResampleMethod,
    dbn: &DbnHyperparams,
    seed: u64,
) -> Result<EnsembleModel> {
    let config = TrainConfig {
        mtry: train.n_features(),
        total_nets: 1,
        dbn: dbn.clone(),
        seed,
        resample: method,
        use_feature_sampling: false,
        aggregation: Aggregation::Mean,
    };
    train_deepbalance(train, &config, 1)
}

/// Ensemble score per row of the full feature matrix.
pub fn predict(ensemble: &EnsembleModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != ensemble.feature_names.len() {
        return Err(Error::Contract(format!(
            "input has {} columns, ensemble was trained on {}",
            x.cols(),
            ensemble.feature_names.len()
        )));
    }
    let member_scores = ensemble
        .members
        .iter()
        .map(|m| m.predict_proba(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(
        &member_scores,
        ensemble.config.aggregation,
        x.rows(),
    ))
}

/// Combines per-member score vectors (all of length `rows`).
pub fn aggregate(member_scores: &[Vec<f64>], rule: Aggregation, rows: usize) -> Vec<f64> {
    let k = member_scores.len().max(1) as f64;
    (0..rows)
        .map(|i| {
            let total: f64 = match rule {
                Aggregation::Mean => member_scores.iter().map(|s| s[i]).sum(),
                Aggregation::MajorityVote => member_scores
                    .iter()
                    .map(|s| if s[i] >= 0.5 { 1.0 } else { 0.0 })
                    .sum(),
            };
            total / k
        })
        .collect()
}

/// `1` where `score ≥ threshold`.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}
