//! Declarative experiments: which data, which methods, which seeds, and
//! where the results go. The `deepbalance` binary is a thin wrapper around
//! the `run_*` functions here.
//!
//! An experiment file is TOML. Every key is optional:
//!
//! ```toml
//! train_fraction = 0.7
//! threshold = 0.5
//! seeds = [1, 2, 3, 4, 5]
//! workers = 4
//! out = "results"
//!
//! [data]
//! source = "csv"            # or "synthetic"
//! path = "creditcard.csv"
//! preset = "credit_card"    # or "paysim"; omit for a plain schema
//! label = "Class"
//! positive_label = "1"
//! features = []             # empty: every non-label, non-dropped column
//! drop = ["Time"]
//! categorical = []
//! max_majority_rows = 100000
//!
//! [dbn]
//! hidden_sizes = [10, 5]
//! cd_k = 1
//! pretrain_epochs = 10
//! pretrain_lr = 0.1
//! finetune_lr = 2.0
//! batch_size = 16
//!
//! [[methods]]
//! kind = "deepbalance"
//! mtry = 5
//! total_nets = 25
//! max_it = 50
//!
//! [[methods]]
//! kind = "smote"
//! k_neighbors = 5
//! amount_multiplier = 2
//! max_it = 100
//!
//! [sweep]
//! parameter = "total_nets"
//! values = [1, 2, 3, 4, 5]
//! ```
//!
//! Method kinds are `deepbalance`, `all_features`, `undersample`,
//! `oversample` (`target_count`), `smote` and `none`.
//!
//! For every seed `s` the data is split with stream `(s, SPLIT_STREAM)` and
//! each method is trained with master seed `s`. The synthetic generator and
//! the majority subsampler use the data seed, so all seeds see the same
//! dataset.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{
    generate_synthetic, load_csv, stratified_split, CsvSchema, Dataset, SyntheticParams,
};
use crate::dbn::DbnHyperparams;
use crate::ensemble::{
    predict, train_baseline, train_deepbalance, Aggregation, EnsembleModel, TrainConfig,
};
use crate::error::Error;
use crate::metrics::{
    evaluate, mean_sd, roc_curve, write_metrics_csv, write_metrics_json, MetricsRow,
};
use crate::numerics::RngStream;
use crate::resampling::ResampleMethod;
use crate::{SPLIT_STREAM, SUBSAMPLE_STREAM};

/// Where in the pipeline a command failed. Each stage has its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Bad flags or experiment file.
    Config,
    /// Data or model file missing or malformed.
    Input,
    /// Training or evaluation failed.
    Run,
    /// Results could not be written.
    Output,
}

impl Stage {
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 2,
            Stage::Input => 3,
            Stage::Run => 4,
            Stage::Output => 5,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Failure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub type RunResult<T> = std::result::Result<T, Failure>;

trait AtStage<T> {
    fn at(self, stage: Stage) -> RunResult<T>;
}

impl<T> AtStage<T> for crate::Result<T> {
    fn at(self, stage: Stage) -> RunResult<T> {
        self.map_err(|error| Failure { stage, error })
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        stage: Stage::Config,
        error: Error::Config(message.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    CreditCard,
    Paysim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        #[serde(default = "defaults::n_majority")]
        n_majority: usize,
        #[serde(default = "defaults::n_minority")]
        n_minority: usize,
        #[serde(default = "defaults::n_features")]
        n_features: usize,
        #[serde(default = "defaults::class_separation")]
        class_separation: f64,
        #[serde(default = "defaults::data_seed")]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        preset: Option<Preset>,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        positive_label: Option<String>,
        #[serde(default)]
        features: Vec<String>,
        #[serde(default)]
        drop: Vec<String>,
        #[serde(default)]
        categorical: Vec<String>,
        /// Keep at most this many majority rows, chosen at random.
        #[serde(default)]
        max_majority_rows: Option<usize>,
        #[serde(default = "defaults::data_seed")]
        seed: u64,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        Self::synthetic(SyntheticParams::standard(defaults::data_seed()))
    }
}

impl DataSource {
    pub fn synthetic(p: SyntheticParams) -> Self {
        DataSource::Synthetic {
            n_majority: p.n_majority,
            n_minority: p.n_minority,
            n_features: p.n_features,
            class_separation: p.class_separation,
            seed: p.seed,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, preset: Option<Preset>) -> Self {
        DataSource::Csv {
            path: path.into(),
            preset,
            label: None,
            positive_label: None,
            features: Vec::new(),
            drop: Vec::new(),
            categorical: Vec::new(),
            max_majority_rows: None,
            seed: defaults::data_seed(),
        }
    }

    /// The loader schema for a CSV source, `None` for synthetic data.
    pub fn schema(&self) -> Option<CsvSchema> {
        let DataSource::Csv {
            preset,
            label,
            positive_label,
            features,
            drop,
            categorical,
            ..
        } = self
        else {
            return None;
        };
        let mut schema = match preset {
            Some(Preset::CreditCard) => CsvSchema::credit_card(),
            Some(Preset::Paysim) => CsvSchema::paysim(),
            None => CsvSchema::synthetic(),
        };
        if let Some(l) = label {
            schema.label_column = l.clone();
        }
        if let Some(p) = positive_label {
            schema.positive_label = p.clone();
        }
        if !features.is_empty() {
            schema.feature_columns = features.clone();
        }
        for (target, extra) in [
            (&mut schema.drop_columns, drop),
            (&mut schema.categorical_columns, categorical),
        ] {
            for c in extra {
                if !target.contains(c) {
                    target.push(c.clone());
                }
            }
        }
        Some(schema)
    }

    pub fn load(&self) -> crate::Result<Dataset> {
        match self {
            DataSource::Synthetic {
                n_majority,
                n_minority,
                n_features,
                class_separation,
                seed,
            } => generate_synthetic(&SyntheticParams {
                n_majority: *n_majority,
                n_minority: *n_minority,
                n_features: *n_features,
                class_separation: *class_separation,
                seed: *seed,
            }),
            DataSource::Csv {
                path,
                max_majority_rows,
                seed,
                ..
            } => {
                let schema = self.schema().expect("csv source has a schema");
                let ds = load_csv(path, &schema)?;
                Ok(match max_majority_rows {
                    Some(cap) => subsample_majority(&ds, *cap, *seed),
                    None => ds,
                })
            }
        }
    }
}

/// Keeps every minority row and at most `cap` majority rows drawn without
/// replacement, in original row order.
pub fn subsample_majority(ds: &Dataset, cap: usize, seed: u64) -> Dataset {
    let (_, mut neg) = ds.class_indices();
    if neg.len() <= cap {
        return ds.clone();
    }
    let mut rng = RngStream::new(seed, SUBSAMPLE_STREAM);
    rng.shuffle(&mut neg);
    let mut keep = vec![false; ds.n_rows()];
    for &i in &neg[..cap] {
        keep[i] = true;
    }
    for (i, &y) in ds.labels().iter().enumerate() {
        if y == 1 {
            keep[i] = true;
        }
    }
    let rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| keep[i]).collect();
    ds.select_rows(&rows)
}

/// One method in a comparison. `max_it` is the fine-tuning epoch count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Deepbalance {
        /// Defaults to `min(5, d)`.
        #[serde(default)]
        mtry: Option<usize>,
        #[serde(default = "defaults::total_nets")]
        total_nets: usize,
        #[serde(default = "defaults::ensemble_max_it")]
        max_it: usize,
        #[serde(default)]
        aggregation: Aggregation,
    },
    AllFeatures {
        #[serde(default = "defaults::total_nets")]
        total_nets: usize,
        #[serde(default = "defaults::ensemble_max_it")]
        max_it: usize,
    },
    Undersample {
        #[serde(default = "defaults::baseline_max_it")]
        max_it: usize,
    },
    Oversample {
        #[serde(default = "defaults::target_count")]
        target_count: usize,
        #[serde(default = "defaults::baseline_max_it")]
        max_it: usize,
    },
    Smote {
        #[serde(default = "defaults::k_neighbors")]
        k_neighbors: usize,
        #[serde(default = "defaults::amount_multiplier")]
        amount_multiplier: usize,
        #[serde(default = "defaults::baseline_max_it")]
        max_it: usize,
    },
    None {
        #[serde(default = "defaults::baseline_max_it")]
        max_it: usize,
    },
}

impl MethodSpec {
    pub fn deepbalance() -> Self {
        MethodSpec::Deepbalance {
            mtry: None,
            total_nets: defaults::total_nets(),
            max_it: defaults::ensemble_max_it(),
            aggregation: Aggregation::Mean,
        }
    }

    /// DeepBalance, the all-features ensemble and the four single-network
    /// baselines with their default settings.
    pub fn all_defaults() -> Vec<Self> {
        let b = defaults::baseline_max_it();
        vec![
            Self::deepbalance(),
            MethodSpec::AllFeatures {
                total_nets: defaults::total_nets(),
                max_it: defaults::ensemble_max_it(),
            },
            MethodSpec::Undersample { max_it: b },
            MethodSpec::Oversample {
                target_count: defaults::target_count(),
                max_it: b,
            },
            MethodSpec::Smote {
                k_neighbors: defaults::k_neighbors(),
                amount_multiplier: defaults::amount_multiplier(),
                max_it: b,
            },
            MethodSpec::None { max_it: b },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Deepbalance { .. } => "deepbalance",
            MethodSpec::AllFeatures { .. } => "all_features",
            MethodSpec::Undersample { .. } => "undersample",
            MethodSpec::Oversample { .. } => "oversample",
            MethodSpec::Smote { .. } => "smote",
            MethodSpec::None { .. } => "none",
        }
    }

    pub fn max_it(&self) -> usize {
        match *self {
            MethodSpec::Deepbalance { max_it, .. }
            | MethodSpec::AllFeatures { max_it, .. }
            | MethodSpec::Undersample { max_it }
            | MethodSpec::Oversample { max_it, .. }
            | MethodSpec::Smote { max_it, .. }
            | MethodSpec::None { max_it } => max_it,
        }
    }

    /// A copy with `parameter` set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: usize) -> crate::Result<Self> {
        let mut m = self.clone();
        match (&mut m, parameter) {
            (
                MethodSpec::Deepbalance { max_it, .. }
                | MethodSpec::AllFeatures { max_it, .. }
                | MethodSpec::Undersample { max_it }
                | MethodSpec::Oversample { max_it, .. }
                | MethodSpec::Smote { max_it, .. }
                | MethodSpec::None { max_it },
                SweepParameter::MaxIt,
            ) => *max_it = value,
            (
                MethodSpec::Deepbalance { total_nets, .. }
                | MethodSpec::AllFeatures { total_nets, .. },
                SweepParameter::TotalNets,
            ) => *total_nets = value,
            (MethodSpec::Deepbalance { mtry, .. }, SweepParameter::Mtry) => *mtry = Some(value),
            _ => {
                return Err(Error::Config(format!(
                    "method {} has no parameter {}",
                    self.name(),
                    parameter.name()
                )))
            }
        }
        Ok(m)
    }

    /// The ensemble configuration this method trains with on `n_features`
    /// columns.
    pub fn train_config(&self, dbn: &DbnHyperparams, n_features: usize, seed: u64) -> TrainConfig {
        let dbn = DbnHyperparams {
            max_it: self.max_it(),
            ..dbn.clone()
        };
        let single = |resample| TrainConfig {
            mtry: n_features,
            total_nets: 1,
            dbn: dbn.clone(),
            seed,
            resample,
            use_feature_sampling: false,
            aggregation: Aggregation::Mean,
        };
        match *self {
            MethodSpec::Deepbalance {
                mtry,
                total_nets,
                aggregation,
                ..
            } => TrainConfig {
                mtry: mtry.unwrap_or(n_features.min(5)),
                total_nets,
                dbn,
                seed,
                resample: ResampleMethod::BalancedBootstrap,
                use_feature_sampling: true,
                aggregation,
            },
            MethodSpec::AllFeatures { total_nets, .. } => TrainConfig {
                mtry: n_features,
                total_nets,
                dbn,
                seed,
                resample: ResampleMethod::BalancedBootstrap,
                use_feature_sampling: false,
                aggregation: Aggregation::Mean,
            },
            MethodSpec::Undersample { .. } => single(ResampleMethod::Undersample),
            MethodSpec::Oversample { target_count, .. } => {
                single(ResampleMethod::Oversample { target_count })
            }
            MethodSpec::Smote {
                k_neighbors,
                amount_multiplier,
                ..
            } => single(ResampleMethod::Smote {
                k_neighbors,
                amount_multiplier,
            }),
            MethodSpec::None { .. } => single(ResampleMethod::None),
        }
    }

    pub fn train(
        &self,
        train: &Dataset,
        dbn: &DbnHyperparams,
        seed: u64,
        workers: usize,
    ) -> crate::Result<EnsembleModel> {
        let config = self.train_config(dbn, train.n_features(), seed);
        if config.total_nets == 1 && !config.use_feature_sampling {
            train_baseline(train, config.resample, &config.dbn, seed)
        } else {
            train_deepbalance(train, &config, workers)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Mtry,
    MaxIt,
    TotalNets,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Mtry => "mtry",
            SweepParameter::MaxIt => "max_it",
            SweepParameter::TotalNets => "total_nets",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "mtry" => Ok(SweepParameter::Mtry),
            "max_it" => Ok(SweepParameter::MaxIt),
            "total_nets" => Ok(SweepParameter::TotalNets),
            other => Err(Error::Config(format!(
                "unknown sweep parameter {other:?} (expected mtry, max_it or total_nets)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub data: DataSource,
    pub train_fraction: f64,
    pub threshold: f64,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub out: PathBuf,
    pub dbn: DbnHyperparams,
    pub methods: Vec<MethodSpec>,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            train_fraction: 0.7,
            threshold: 0.5,
            seeds: vec![1],
            workers: 1,
            out: PathBuf::from("deepbalance-out"),
            dbn: DbnHyperparams::default(),
            methods: MethodSpec::all_defaults(),
            sweep: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> crate::Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))
            .at(Stage::Config)?;
        Self::from_toml(&text)
            .map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })
            .at(Stage::Config)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep needs at least one value".into()));
            }
        }
        self.dbn.validate()
    }
}

/// Outcome of training and scoring one method on one seed.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: MetricsRow,
    pub roc: Vec<RocPoint>,
    pub model: Option<EnsembleModel>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocPoint {
    pub method: String,
    pub seed: u64,
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

fn split_for(
    ds: &Dataset,
    spec: &ExperimentSpec,
    seed: u64,
) -> crate::Result<crate::data::SplitResult> {
    stratified_split(
        ds,
        spec.train_fraction,
        &mut RngStream::new(seed, SPLIT_STREAM),
    )
}

/// Trains `method` on the seed's training split and scores the test split.
/// Errors are captured in the outcome, never returned.
pub fn run_method(
    ds: &Dataset,
    spec: &ExperimentSpec,
    method: &MethodSpec,
    seed: u64,
) -> RunOutcome {
    let name = method.name();
    let attempt = || -> crate::Result<(MetricsRow, Vec<RocPoint>, EnsembleModel)> {
        let split = split_for(ds, spec, seed)?;
        let start = Instant::now();
        let model = method.train(&split.train, &spec.dbn, seed, spec.workers)?;
        let seconds = start.elapsed().as_secs_f64();
        let scores = predict(&model, split.test.features())?;
        let eval = evaluate(&scores, split.test.labels(), spec.threshold)?;
        let roc = roc_curve(&scores, split.test.labels())?;
        let points = roc
            .points
            .iter()
            .zip(&roc.thresholds)
            .map(|(&(fpr, tpr), &threshold)| RocPoint {
                method: name.to_string(),
                seed,
                threshold,
                fpr,
                tpr,
            })
            .collect();
        Ok((
            MetricsRow::success(name, &eval, seed, seconds),
            points,
            model,
        ))
    };
    match attempt() {
        Ok((row, roc, model)) => RunOutcome {
            row,
            roc,
            model: Some(model),
            error: None,
        },
        Err(e) => RunOutcome {
            row: MetricsRow::failure(name, spec.threshold, seed),
            roc: Vec::new(),
            model: None,
            error: Some(e.to_string()),
        },
    }
}

fn load_data(spec: &ExperimentSpec) -> RunResult<Dataset> {
    spec.data.load().at(Stage::Input)
}

fn create_out_dir(dir: &Path) -> RunResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(dir, e))
        .at(Stage::Output)
}

fn write_serialized_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> RunResult<()> {
    let ser = |e: csv::Error| Error::Serialization(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(ser)
        .at(Stage::Output)?;
    w.write_record(header).map_err(ser).at(Stage::Output)?;
    for r in rows {
        w.serialize(r).map_err(ser).at(Stage::Output)?;
    }
    w.flush().map_err(|e| Error::io(path, e)).at(Stage::Output)
}

pub const ROC_COLUMNS: [&str; 5] = ["method", "seed", "threshold", "fpr", "tpr"];

/// A method × seed run that did not produce metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub method: String,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub row: MetricsRow,
    pub model_path: PathBuf,
}

/// Trains the first method on the first seed, then writes `model.json`,
/// `metrics.csv` and `metrics.json` under `spec.out`.
pub fn run_train(spec: &ExperimentSpec) -> RunResult<TrainReport> {
    spec.validate().at(Stage::Config)?;
    let ds = load_data(spec)?;
    let method = &spec.methods[0];
    let seed = spec.seeds[0];
    let outcome = run_method(&ds, spec, method, seed);
    let Some(model) = outcome.model else {
        return Err(Failure {
            stage: Stage::Run,
            error: Error::Training(outcome.error.unwrap_or_default()),
        });
    };
    create_out_dir(&spec.out)?;
    let model_path = spec.out.join("model.json");
    model.save(&model_path).at(Stage::Output)?;
    let rows = [outcome.row.clone()];
    write_metrics_csv(&spec.out.join("metrics.csv"), &rows).at(Stage::Output)?;
    write_metrics_json(&spec.out.join("metrics.json"), &rows).at(Stage::Output)?;
    Ok(TrainReport {
        row: outcome.row,
        model_path,
    })
}

/// Per-method mean and sample standard deviation over successful seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_acc_plus: Option<f64>,
    pub sd_acc_plus: Option<f64>,
    pub mean_acc_minus: Option<f64>,
    pub sd_acc_minus: Option<f64>,
    pub mean_balanced_accuracy: Option<f64>,
    pub sd_balanced_accuracy: Option<f64>,
    pub mean_auc: Option<f64>,
    pub sd_auc: Option<f64>,
    pub mean_wall_time_seconds: Option<f64>,
}

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "method",
    "runs",
    "failures",
    "mean_acc_plus",
    "sd_acc_plus",
    "mean_acc_minus",
    "sd_acc_minus",
    "mean_balanced_accuracy",
    "sd_balanced_accuracy",
    "mean_auc",
    "sd_auc",
    "mean_wall_time_seconds",
];

fn summarize(method: &str, rows: &[&MetricsRow]) -> MethodSummary {
    let ok: Vec<&&MetricsRow> = rows.iter().filter(|r| !r.is_failure()).collect();
    let stat = |f: &dyn Fn(&MetricsRow) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        if v.is_empty() {
            return (None, None);
        }
        let (m, s) = mean_sd(&v);
        (Some(m), Some(s))
    };
    let (mean_acc_plus, sd_acc_plus) = stat(&|r| r.acc_plus);
    let (mean_acc_minus, sd_acc_minus) = stat(&|r| r.acc_minus);
    let (mean_balanced_accuracy, sd_balanced_accuracy) = stat(&|r| r.balanced_accuracy);
    let (mean_auc, sd_auc) = stat(&|r| r.auc);
    let (mean_wall_time_seconds, _) = stat(&|r| r.wall_time_seconds);
    MethodSummary {
        method: method.to_string(),
        runs: rows.len(),
        failures: rows.len() - ok.len(),
        mean_acc_plus,
        sd_acc_plus,
        mean_acc_minus,
        sd_acc_minus,
        mean_balanced_accuracy,
        sd_balanced_accuracy,
        mean_auc,
        sd_auc,
        mean_wall_time_seconds,
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    /// Seed-major: all methods for the first seed, then the next seed.
    pub rows: Vec<MetricsRow>,
    pub summary: Vec<MethodSummary>,
    pub roc: Vec<RocPoint>,
    pub failures: Vec<RunFailure>,
}

/// Every method on every seed. Writes `metrics.csv`, `metrics.json`,
/// `summary.csv` and `roc.csv` under `spec.out`. Failed runs appear as rows
/// with empty metric cells.
pub fn run_benchmark(spec: &ExperimentSpec) -> RunResult<BenchmarkReport> {
    spec.validate().at(Stage::Config)?;
    if spec.methods.len() < 2 {
        return Err(config_error("a benchmark compares at least two methods"));
    }
    let ds = load_data(spec)?;
    let report = benchmark_dataset(&ds, spec);
    create_out_dir(&spec.out)?;
    write_metrics_csv(&spec.out.join("metrics.csv"), &report.rows).at(Stage::Output)?;
    write_metrics_json(&spec.out.join("metrics.json"), &report.rows).at(Stage::Output)?;
    write_serialized_csv(
        &spec.out.join("summary.csv"),
        &report.summary,
        &SUMMARY_COLUMNS,
    )?;
    write_serialized_csv(&spec.out.join("roc.csv"), &report.roc, &ROC_COLUMNS)?;
    Ok(report)
}

/// The benchmark grid on an already loaded dataset, without writing files.
pub fn benchmark_dataset(ds: &Dataset, spec: &ExperimentSpec) -> BenchmarkReport {
    let mut rows = Vec::new();
    let mut roc = Vec::new();
    let mut failures = Vec::new();
    for &seed in &spec.seeds {
        for method in &spec.methods {
            let outcome = run_method(ds, spec, method, seed);
            if let Some(message) = outcome.error {
                failures.push(RunFailure {
                    method: method.name().to_string(),
                    seed,
                    message,
                });
            }
            rows.push(outcome.row);
            roc.extend(outcome.roc);
        }
    }
    let mut names: Vec<&str> = Vec::new();
    for m in &spec.methods {
        if !names.contains(&m.name()) {
            names.push(m.name());
        }
    }
    let summary = names
        .iter()
        .map(|name| {
            let mine: Vec<&MetricsRow> = rows.iter().filter(|r| r.method == *name).collect();
            summarize(name, &mine)
        })
        .collect();
    BenchmarkReport {
        rows,
        summary,
        roc,
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: usize,
    pub mean_auc: Option<f64>,
    pub sd_auc: Option<f64>,
    pub mean_train_seconds: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 4] = ["value", "mean_auc", "sd_auc", "mean_train_seconds"];

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub method: String,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RunFailure>,
}

/// Varies one parameter of the first method in the spec. Writes `sweep.csv`
/// under `spec.out`.
pub fn run_sweep(spec: &ExperimentSpec) -> RunResult<SweepReport> {
    spec.validate().at(Stage::Config)?;
    let Some(sweep) = &spec.sweep else {
        return Err(config_error("no sweep parameter given"));
    };
    let ds = load_data(spec)?;
    let report = sweep_dataset(&ds, spec, sweep).at(Stage::Config)?;
    create_out_dir(&spec.out)?;
    write_serialized_csv(&spec.out.join("sweep.csv"), &report.rows, &SWEEP_COLUMNS)?;
    Ok(report)
}

/// The sweep on an already loaded dataset, without writing files. Fails
/// only if the parameter does not apply to the method.
pub fn sweep_dataset(
    ds: &Dataset,
    spec: &ExperimentSpec,
    sweep: &SweepSpec,
) -> crate::Result<SweepReport> {
    let base = &spec.methods[0];
    let variants = sweep
        .values
        .iter()
        .map(|&v| base.with_parameter(sweep.parameter, v))
        .collect::<crate::Result<Vec<_>>>()?;
    // seeds outer, values inner: every value is timed across the whole run,
    // so drifting machine speed does not masquerade as a trend
    let mut aucs = vec![Vec::new(); variants.len()];
    let mut times = vec![Vec::new(); variants.len()];
    let mut failures = Vec::new();
    for &seed in &spec.seeds {
        for (v, method) in variants.iter().enumerate() {
            let outcome = run_method(ds, spec, method, seed);
            match outcome.error {
                Some(message) => failures.push(RunFailure {
                    method: format!(
                        "{}[{}={}]",
                        base.name(),
                        sweep.parameter.name(),
                        sweep.values[v]
                    ),
                    seed,
                    message,
                }),
                None => {
                    aucs[v].extend(outcome.row.auc);
                    times[v].extend(outcome.row.wall_time_seconds);
                }
            }
        }
    }
    let rows = sweep
        .values
        .iter()
        .zip(aucs.iter().zip(&times))
        .map(|(&value, (a, t))| {
            let (mean_auc, sd_auc) = if a.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_sd(a);
                (Some(m), Some(s))
            };
            SweepRow {
                value,
                mean_auc,
                sd_auc,
                mean_train_seconds: (!t.is_empty()).then(|| mean_sd(t).0),
            }
        })
        .collect();
    Ok(SweepReport {
        parameter: sweep.parameter,
        method: base.name().to_string(),
        rows,
        failures,
    })
}

/// Writes the synthetic dataset described by `params` as CSV.
pub fn gen_synth(params: &SyntheticParams, out: &Path) -> RunResult<Dataset> {
    let ds = generate_synthetic(params).at(Stage::Config)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    ds.write_csv(out).at(Stage::Output)?;
    Ok(ds)
}

#[derive(Debug, Clone)]
pub struct EvaluateReport {
    pub row: MetricsRow,
    pub roc: Vec<RocPoint>,
}

/// Scores a saved model against every row of a CSV. Writes `metrics.csv`,
/// `metrics.json` and `roc.csv` under `out`.
pub fn run_evaluate(
    model_path: &Path,
    data_path: &Path,
    schema: &CsvSchema,
    threshold: f64,
    out: &Path,
) -> RunResult<EvaluateReport> {
    let model = EnsembleModel::load(model_path).at(Stage::Input)?;
    let ds = load_csv(data_path, schema).at(Stage::Input)?;
    if ds.feature_names() != model.feature_names.as_slice() {
        return Err(Failure {
            stage: Stage::Input,
            error: Error::Load {
                path: data_path.to_path_buf(),
                message: format!(
                    "features {:?} do not match the model's {:?}",
                    ds.feature_names(),
                    model.feature_names
                ),
            },
        });
    }
    let scores = predict(&model, ds.features()).at(Stage::Run)?;
    let eval = evaluate(&scores, ds.labels(), threshold).at(Stage::Run)?;
    let curve = roc_curve(&scores, ds.labels()).at(Stage::Run)?;
    let seed = model.config.seed;
    let roc: Vec<RocPoint> = curve
        .points
        .iter()
        .zip(&curve.thresholds)
        .map(|(&(fpr, tpr), &t)| RocPoint {
            method: "evaluate".into(),
            seed,
            threshold: t,
            fpr,
            tpr,
        })
        .collect();
    let row = MetricsRow {
        wall_time_seconds: None,
        ..MetricsRow::success("evaluate", &eval, seed, 0.0)
    };
    create_out_dir(out)?;
    let rows = [row.clone()];
    write_metrics_csv(&out.join("metrics.csv"), &rows).at(Stage::Output)?;
    write_metrics_json(&out.join("metrics.json"), &rows).at(Stage::Output)?;
    write_serialized_csv(&out.join("roc.csv"), &roc, &ROC_COLUMNS)?;
    Ok(EvaluateReport { row, roc })
}

mod defaults {
    pub fn n_majority() -> usize {
        20_000
    }
    pub fn n_minority() -> usize {
        200
    }
    pub fn n_features() -> usize {
        10
    }
    pub fn class_separation() -> f64 {
        3.0
    }
    pub fn data_seed() -> u64 {
        1
    }
    pub fn total_nets() -> usize {
        25
    }
    pub fn ensemble_max_it() -> usize {
        50
    }
    pub fn baseline_max_it() -> usize {
        100
    }
    pub fn target_count() -> usize {
        1000
    }
    pub fn k_neighbors() -> usize {
        5
    }
    pub fn amount_multiplier() -> usize {
        2
    }
}
