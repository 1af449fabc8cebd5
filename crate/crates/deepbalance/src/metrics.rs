//! Confusion counts, class-wise accuracies, weighted accuracy, the empirical
//! ROC curve and its area.
//!
//! Label 1 is the positive (minority) class throughout. Metrics with an empty
//! denominator return [`Error::UndefinedMetric`] instead of a sentinel.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn positives(&self) -> usize {
        self.true_positive + self.false_negative
    }

    pub fn negatives(&self) -> usize {
        self.true_negative + self.false_positive
    }
}

fn check_binary(labels: &[u8], what: &str) -> Result<()> {
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Contract(format!(
            "{what} contain non-binary value {bad}"
        )));
    }
    Ok(())
}

pub fn confusion(true_labels: &[u8], predicted: &[u8]) -> Result<ConfusionCounts> {
    if true_labels.len() != predicted.len() {
        return Err(Error::Contract(format!(
            "{} true labels but {} predictions",
            true_labels.len(),
            predicted.len()
        )));
    }
    check_binary(true_labels, "true labels")?;
    check_binary(predicted, "predictions")?;
    let mut c = ConfusionCounts::default();
    for (&t, &p) in true_labels.iter().zip(predicted) {
        match (t, p) {
            (1, 1) => c.true_positive += 1,
            (0, 1) => c.false_positive += 1,
            (0, 0) => c.true_negative += 1,
            _ => c.false_negative += 1,
        }
    }
    Ok(c)
}

/// Misclassifications over observations.
pub fn error_rate(c: &ConfusionCounts) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::UndefinedMetric(
            "error rate of an empty evaluation set".into(),
        ));
    }
    Ok((c.false_positive + c.false_negative) as f64 / c.total() as f64)
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    error_rate(c).map(|e| 1.0 - e)
}

/// True positive rate (sensitivity), `TP / (TP + FN)`.
pub fn acc_plus(c: &ConfusionCounts) -> Result<f64> {
    if c.positives() == 0 {
        return Err(Error::UndefinedMetric(
            "true positive rate needs at least one positive".into(),
        ));
    }
    Ok(c.true_positive as f64 / c.positives() as f64)
}

/// True negative rate (specificity), `TN / (TN + FP)`.
pub fn acc_minus(c: &ConfusionCounts) -> Result<f64> {
    if c.negatives() == 0 {
        return Err(Error::UndefinedMetric(
            "true negative rate needs at least one negative".into(),
        ));
    }
    Ok(c.true_negative as f64 / c.negatives() as f64)
}

/// `β·Acc⁻ + (1 − β)·Acc⁺`.
pub fn weighted_accuracy(c: &ConfusionCounts, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Contract(format!("beta {beta} outside [0, 1]")));
    }
    Ok(weighted_from_rates(acc_plus(c)?, acc_minus(c)?, beta))
}

pub fn weighted_from_rates(acc_plus: f64, acc_minus: f64, beta: f64) -> f64 {
    beta * acc_minus + (1.0 - beta) * acc_plus
}

/// Weighted accuracy with `β = 0.5`.
pub fn balanced_accuracy(c: &ConfusionCounts) -> Result<f64> {
    weighted_accuracy(c, 0.5)
}

/// Empirical ROC curve. `thresholds[i]` is the score cut-off (`score ≥ t`
/// predicts positive) that yields `points[i]`; the first point uses +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

impl RocCurve {
    /// Trapezoidal area under the polyline.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }
}

fn check_scores(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    check_binary(labels, "labels")?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Contract("scores must be finite".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "ROC needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    Ok((pos, neg))
}

/// Sweeps the threshold down through every distinct score. Tied scores move
/// the curve in a single (possibly diagonal) step.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]].total_cmp(&s) == Ordering::Equal {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(s);
    }
    Ok(RocCurve { points, thresholds })
}

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)`, from mid-ranks.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // ranks are 1-based; doubled so that mid-ranks stay integral
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]].total_cmp(&scores[order[i]]) == Ordering::Equal {
            j += 1;
        }
        let twice_mid = (i + 1 + j) as u128;
        let group_pos = order[i..j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        twice_rank_sum += twice_mid * group_pos;
        i = j;
    }
    let p = pos as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Threshold metrics plus AUC for one scored evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub confusion: ConfusionCounts,
    pub acc_plus: f64,
    pub acc_minus: f64,
    pub balanced_accuracy: f64,
    pub auc: f64,
    pub threshold: f64,
}

pub fn evaluate(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Evaluation> {
    let predicted: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let c = confusion(labels, &predicted)?;
    Ok(Evaluation {
        confusion: c,
        acc_plus: acc_plus(&c)?,
        acc_minus: acc_minus(&c)?,
        balanced_accuracy: balanced_accuracy(&c)?,
        auc: auc(scores, labels)?,
        threshold,
    })
}

/// One row of a metrics report. Metric cells are empty when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub acc_plus: Option<f64>,
    pub acc_minus: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub threshold: f64,
    pub seed: u64,
    pub wall_time_seconds: Option<f64>,
}

pub const METRICS_COLUMNS: [&str; 8] = [
    "method",
    "acc_plus",
    "acc_minus",
    "balanced_accuracy",
    "auc",
    "threshold",
    "seed",
    "wall_time_seconds",
];

impl MetricsRow {
    pub fn success(method: &str, eval: &Evaluation, seed: u64, wall_time_seconds: f64) -> Self {
        Self {
            method: method.to_string(),
            acc_plus: Some(eval.acc_plus),
            acc_minus: Some(eval.acc_minus),
            balanced_accuracy: Some(eval.balanced_accuracy),
            auc: Some(eval.auc),
            threshold: eval.threshold,
            seed,
            wall_time_seconds: Some(wall_time_seconds),
        }
    }

    pub fn failure(method: &str, threshold: f64, seed: u64) -> Self {
        Self {
            method: method.to_string(),
            acc_plus: None,
            acc_minus: None,
            balanced_accuracy: None,
            auc: None,
            threshold,
            seed,
            wall_time_seconds: None,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.auc.is_none()
    }
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    // header written explicitly so an empty report still carries the schema
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(ser)?;
    w.write_record(METRICS_COLUMNS).map_err(ser)?;
    for row in rows {
        w.serialize(row).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_metrics_json(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let text =
        serde_json::to_string_pretty(rows).map_err(|e| Error::Serialization(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
