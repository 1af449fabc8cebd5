//! Class rebalancing: the balanced bootstrap used inside the ensemble, plus
//! the random under/over-sampling and SMOTE baselines.
//!
//! All functions are pure in `(Dataset, RngStream)`. Outputs list minority
//! rows first, then majority rows.

use serde::{Deserialize, Serialize};

use crate::data::{fit_standardizer, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResampleMethod {
    /// All minority rows plus as many majority rows drawn with replacement.
    BalancedBootstrap,
    /// All minority rows plus as many majority rows drawn without replacement.
    Undersample,
    /// `target_count` rows drawn with replacement from each class.
    Oversample { target_count: usize },
    /// Synthetic minority interpolation followed by majority downsampling.
    Smote {
        k_neighbors: usize,
        amount_multiplier: usize,
    },
    /// Use the training data as is.
    None,
}

impl ResampleMethod {
    pub const DEFAULT_SMOTE: ResampleMethod = ResampleMethod::Smote {
        k_neighbors: 5,
        amount_multiplier: 2,
    };

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResampleMethod::Oversample { target_count } if target_count < 1 => Err(
                Error::Resample("oversampling target must be at least 1".into()),
            ),
            ResampleMethod::Smote { k_neighbors, .. } if k_neighbors < 1 => {
                Err(Error::Resample("SMOTE needs k ≥ 1".into()))
            }
            ResampleMethod::Smote {
                amount_multiplier, ..
            } if amount_multiplier < 1 => Err(Error::Resample(
                "SMOTE amount multiplier must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ResampleMethod::BalancedBootstrap => "balanced_bootstrap",
            ResampleMethod::Undersample => "undersample",
            ResampleMethod::Oversample { .. } => "oversample",
            ResampleMethod::Smote { .. } => "smote",
            ResampleMethod::None => "none",
        }
    }
}

/// Applies `method` to a training set containing both classes.
pub fn resample(train: &Dataset, method: &ResampleMethod, rng: &mut RngStream) -> Result<Dataset> {
    method.validate()?;
    match *method {
        ResampleMethod::BalancedBootstrap => {
            let (pos, neg) = train.class_indices();
            let idx = balanced_bootstrap_indices(&pos, &neg, rng)?;
            Ok(train.select_rows(&idx))
        }
        ResampleMethod::Undersample => random_undersample(train, rng),
        ResampleMethod::Oversample { target_count } => random_oversample(train, target_count, rng),
        ResampleMethod::Smote {
            k_neighbors,
            amount_multiplier,
        } => smote(train, k_neighbors, amount_multiplier, rng),
        ResampleMethod::None => Ok(train.clone()),
    }
}

/// Row indices of a balanced bootstrap: every index of `minority` in order,
/// followed by `minority.len()` draws with replacement from `majority`.
pub fn balanced_bootstrap_indices(
    minority: &[usize],
    majority: &[usize],
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if minority.is_empty() || majority.is_empty() {
        return Err(Error::Resample(format!(
            "balanced bootstrap needs both classes ({} minority, {} majority)",
            minority.len(),
            majority.len()
        )));
    }
    let mut idx = minority.to_vec();
    idx.extend((0..minority.len()).map(|_| majority[rng.below(majority.len())]));
    Ok(idx)
}

/// Balanced bootstrap over two single-class datasets. The minority rows are
/// returned unchanged and labelled 1, the drawn majority rows are labelled 0.
pub fn balanced_bootstrap(
    minority: &Dataset,
    majority: &Dataset,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if minority.is_empty() || majority.is_empty() {
        return Err(Error::Resample(format!(
            "balanced bootstrap needs both classes ({} minority, {} majority)",
            minority.n_rows(),
            majority.n_rows()
        )));
    }
    let draws: Vec<usize> = (0..minority.n_rows())
        .map(|_| rng.below(majority.n_rows()))
        .collect();
    let theta = majority.select_rows(&draws);
    let features = minority.features().vstack(theta.features())?;
    let labels = std::iter::repeat_n(1, minority.n_rows())
        .chain(std::iter::repeat_n(0, theta.n_rows()))
        .collect();
    Dataset::new(features, labels, minority.feature_names().to_vec())
}

/// `k` distinct elements of `pool`, uniformly without replacement.
fn sample_without_replacement(pool: &[usize], k: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut pool = pool.to_vec();
    for i in 0..k {
        let j = i + rng.below(pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

pub fn random_undersample(train: &Dataset, rng: &mut RngStream) -> Result<Dataset> {
    let (pos, neg) = train.class_indices();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Resample("undersampling needs both classes".into()));
    }
    if neg.len() < pos.len() {
        return Err(Error::Resample(format!(
            "cannot draw {} majority rows without replacement from {}",
            pos.len(),
            neg.len()
        )));
    }
    let mut idx = pos.clone();
    idx.extend(sample_without_replacement(&neg, pos.len(), rng));
    Ok(train.select_rows(&idx))
}

pub fn random_oversample(
    train: &Dataset,
    target_count: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if target_count < 1 {
        return Err(Error::Resample(
            "oversampling target must be at least 1".into(),
        ));
    }
    let (pos, neg) = train.class_indices();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Resample("oversampling needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..target_count)
        .map(|_| pos[rng.below(pos.len())])
        .collect();
    idx.extend((0..target_count).map(|_| neg[rng.below(neg.len())]));
    Ok(train.select_rows(&idx))
}

/// Where a synthetic SMOTE row came from, as row indices into the training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub seed: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub dataset: Dataset,
    /// One entry per synthetic row, in output order. Synthetic rows follow the
    /// original minority rows.
    pub origins: Vec<SyntheticOrigin>,
}

/// The `k` nearest other minority rows of every minority row, by Euclidean
/// distance on z-scored features. Ties go to the lower row index.
pub fn minority_neighbors(standardized: &Matrix, minority: &[usize], k: usize) -> Vec<Vec<usize>> {
    minority
        .iter()
        .map(|&p| {
            let mut cands: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&q| q != p)
                .map(|&q| {
                    let d2: f64 = standardized
                        .row(p)
                        .iter()
                        .zip(standardized.row(q))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, q)
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cands.truncate(k);
            cands.into_iter().map(|(_, q)| q).collect()
        })
        .collect()
}

pub fn smote(
    train: &Dataset,
    k: usize,
    amount_multiplier: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    smote_with_origins(train, k, amount_multiplier, rng).map(|o| o.dataset)
}

/// SMOTE with majority downsampling.
///
/// Each minority row `p` yields `amount_multiplier` rows `p + u·(q − p)` with
/// `q` one of its `k` nearest minority neighbours and `u ~ U(0, 1)`. The
/// majority is then drawn without replacement down to the augmented minority
/// count, or kept whole when it is smaller than that.
pub fn smote_with_origins(
    train: &Dataset,
    k: usize,
    amount_multiplier: usize,
    rng: &mut RngStream,
) -> Result<SmoteOutput> {
    if k < 1 {
        return Err(Error::Resample("SMOTE needs k ≥ 1".into()));
    }
    if amount_multiplier < 1 {
        return Err(Error::Resample(
            "SMOTE amount multiplier must be at least 1".into(),
        ));
    }
    let (pos, neg) = train.class_indices();
    if pos.len() < 2 {
        return Err(Error::Resample(format!(
            "SMOTE needs at least 2 minority rows, found {}",
            pos.len()
        )));
    }
    if neg.is_empty() {
        return Err(Error::Resample("SMOTE needs majority rows".into()));
    }
    let x = train.features();
    let z = fit_standardizer(x).apply(x)?;
    let k = k.min(pos.len() - 1);
    let neighbors = minority_neighbors(&z, &pos, k);

    let d = train.n_features();
    let mut synth = Vec::with_capacity(pos.len() * amount_multiplier * d);
    let mut origins = Vec::with_capacity(pos.len() * amount_multiplier);
    for (&p, nn) in pos.iter().zip(&neighbors) {
        for _ in 0..amount_multiplier {
            let q = nn[rng.below(nn.len())];
            let gap = rng.uniform();
            synth.extend(
                x.row(p)
                    .iter()
                    .zip(x.row(q))
                    .map(|(a, b)| a + gap * (b - a)),
            );
            origins.push(SyntheticOrigin {
                seed: p,
                neighbor: q,
                gap,
            });
        }
    }
    let n_minority = pos.len() + origins.len();
    let majority = sample_without_replacement(&neg, n_minority.min(neg.len()), rng);

    let synthetic = Matrix::new(origins.len(), d, synth)?;
    let features = x
        .select_rows(&pos)
        .vstack(&synthetic)?
        .vstack(&x.select_rows(&majority))?;
    let labels = std::iter::repeat_n(1, n_minority)
        .chain(std::iter::repeat_n(0, majority.len()))
        .collect();
    Ok(SmoteOutput {
        dataset: Dataset::new(features, labels, train.feature_names().to_vec())?,
        origins,
    })
}
