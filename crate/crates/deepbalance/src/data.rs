//! Datasets, CSV ingestion, stratified splitting, z-score standardization and
//! a synthetic two-Gaussian generator.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

/// Feature matrix plus binary labels. Label `1` is the minority (positive,
/// fraud) class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Contract(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Contract(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::Contract("dataset needs at least one feature".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Contract(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negative(&self) -> usize {
        self.n_rows() - self.n_positive()
    }

    /// Row indices of the minority (label 1) and majority (label 0) classes.
    pub fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.n_rows()).partition(|&i| self.labels[i] == 1)
    }

    /// Rows in the given order; repeated indices produce repeated rows.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn select_features(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_cols(indices),
            labels: self.labels.clone(),
            feature_names: indices
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_names != other.feature_names {
            return Err(Error::Contract(
                "concatenating datasets with different features".into(),
            ));
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            features: self.features.vstack(&other.features)?,
            labels,
            feature_names: self.feature_names.clone(),
        })
    }

    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.feature_names.clone())
    }

    /// Writes the dataset as CSV with the feature names and a final `label`
    /// column. Floats use the shortest representation that round-trips.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(SYNTHETIC_LABEL);
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.features.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].to_string());
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Column roles for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub label_column: String,
    /// Cell value (after trimming) that marks a positive row; anything else is 0.
    pub positive_label: String,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    /// Columns expanded into one indicator feature per level.
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    /// Fixed level lists for categorical columns. Columns without an entry use
    /// the sorted set of values seen in the file.
    #[serde(default)]
    pub categorical_levels: BTreeMap<String, Vec<String>>,
    /// Restrict the feature space to these columns. Empty means every column
    /// that is neither the label nor dropped.
    #[serde(default)]
    pub feature_columns: Vec<String>,
}

impl CsvSchema {
    pub fn new(label_column: impl Into<String>, positive_label: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            positive_label: positive_label.into(),
            drop_columns: Vec::new(),
            categorical_columns: Vec::new(),
            categorical_levels: BTreeMap::new(),
            feature_columns: Vec::new(),
        }
    }

    /// European credit-card transactions: label `Class`, `Time` dropped,
    /// features `V1..V28` and `Amount` taken from the header.
    pub fn credit_card() -> Self {
        let mut s = Self::new("Class", "1");
        s.drop_columns = vec!["Time".into()];
        s
    }

    /// PaySim mobile-money transactions: transaction type (one-hot) plus the
    /// amount and the four balance columns.
    pub fn paysim() -> Self {
        let mut s = Self::new("isFraud", "1");
        s.feature_columns = [
            "type",
            "amount",
            "oldbalanceOrg",
            "newbalanceOrig",
            "oldbalanceDest",
            "newbalanceDest",
        ]
        .map(String::from)
        .to_vec();
        s.categorical_columns = vec!["type".into()];
        s.categorical_levels.insert(
            "type".into(),
            ["CASH_IN", "CASH_OUT", "DEBIT", "PAYMENT", "TRANSFER"]
                .map(String::from)
                .to_vec(),
        );
        s
    }

    /// Schema of files written by [`Dataset::write_csv`].
    pub fn synthetic() -> Self {
        Self::new(SYNTHETIC_LABEL, "1")
    }
}

pub const SYNTHETIC_LABEL: &str = "label";

enum ColumnKind {
    Numeric,
    Categorical(Vec<String>),
}

/// Reads a comma-separated file with a header row into a [`Dataset`].
///
/// Numeric cells must parse as finite reals; empty cells are rejected. Row
/// numbers in errors count data rows from 1 (the header is not counted).
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let load_err = |message: String| Error::Load {
        path: path.to_path_buf(),
        message,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| header.iter().position(|h| h == name);

    let label_idx = find(&schema.label_column)
        .ok_or_else(|| load_err(format!("missing label column '{}'", schema.label_column)))?;
    for c in schema
        .drop_columns
        .iter()
        .chain(&schema.categorical_columns)
        .chain(&schema.feature_columns)
    {
        if find(c).is_none() {
            return Err(load_err(format!("missing column '{c}'")));
        }
    }
    let feature_cols: Vec<usize> = if schema.feature_columns.is_empty() {
        (0..header.len())
            .filter(|&j| j != label_idx && !schema.drop_columns.contains(&header[j]))
            .collect()
    } else {
        let mut cols: Vec<usize> = schema
            .feature_columns
            .iter()
            .filter_map(|c| find(c))
            .filter(|j| !schema.drop_columns.contains(&header[*j]))
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    };
    if feature_cols.is_empty() {
        return Err(load_err("no feature columns".into()));
    }

    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_err(path, e))?;

    let kinds: Vec<ColumnKind> = feature_cols
        .iter()
        .map(|&j| {
            let name = &header[j];
            if !schema.categorical_columns.contains(name) {
                return ColumnKind::Numeric;
            }
            let levels = match schema.categorical_levels.get(name) {
                Some(levels) => levels.clone(),
                None => records
                    .iter()
                    .filter_map(|r| r.get(j).map(|v| v.trim().to_string()))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
            };
            ColumnKind::Categorical(levels)
        })
        .collect();

    let mut feature_names = Vec::new();
    for (&j, kind) in feature_cols.iter().zip(&kinds) {
        match kind {
            ColumnKind::Numeric => feature_names.push(header[j].clone()),
            ColumnKind::Categorical(levels) => {
                feature_names.extend(levels.iter().map(|l| format!("{}={l}", header[j])))
            }
        }
    }

    let width = feature_names.len();
    let mut data = Vec::with_capacity(records.len() * width);
    let mut labels = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        let row = r + 1;
        if rec.len() != header.len() {
            return Err(load_err(format!(
                "row {row}: expected {} fields, found {}",
                header.len(),
                rec.len()
            )));
        }
        let label = rec[label_idx].trim();
        labels.push(u8::from(label == schema.positive_label));
        for (&j, kind) in feature_cols.iter().zip(&kinds) {
            let cell = rec[j].trim();
            if cell.is_empty() {
                return Err(load_err(format!(
                    "row {row}, column '{}': missing value",
                    header[j]
                )));
            }
            match kind {
                ColumnKind::Numeric => {
                    let v: f64 = cell
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| {
                            load_err(format!(
                                "row {row}, column '{}': cannot parse '{cell}' as a number",
                                header[j]
                            ))
                        })?;
                    data.push(v);
                }
                ColumnKind::Categorical(levels) => {
                    let hit = levels.iter().position(|l| l == cell).ok_or_else(|| {
                        load_err(format!(
                            "row {row}, column '{}': unknown level '{cell}'",
                            header[j]
                        ))
                    })?;
                    data.extend((0..levels.len()).map(|k| if k == hit { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    let features = Matrix::new(labels.len(), width, data)?;
    Dataset::new(features, labels, feature_names)
}

/// Disjoint train and test partitions of one dataset.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
}

/// Per-class split without replacement. Each class contributes
/// `floor(train_fraction × class_count)` rows to the training set; the rest go
/// to the test set. Both partitions keep the original row order.
pub fn stratified_split(
    ds: &Dataset,
    train_fraction: f64,
    rng: &mut RngStream,
) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::Split(format!(
            "train fraction {train_fraction} outside (0, 1]"
        )));
    }
    let (pos, neg) = ds.class_indices();
    if train_fraction < 1.0 && (pos.is_empty() || neg.is_empty()) {
        return Err(Error::Split(format!(
            "both classes must be present ({} positive, {} negative)",
            pos.len(),
            neg.len()
        )));
    }
    let mut in_train = vec![false; ds.n_rows()];
    for mut class in [pos, neg] {
        // the epsilon keeps products such as 0.29 × 100 from flooring to 28
        let take = ((train_fraction * class.len() as f64) + 1e-9).floor() as usize;
        let take = take.min(class.len());
        rng.shuffle(&mut class);
        for &i in &class[..take] {
            in_train[i] = true;
        }
    }
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
        (0..ds.n_rows()).partition(|&i| in_train[i]);
    Ok(SplitResult {
        train: ds.select_rows(&train_idx),
        test: ds.select_rows(&test_idx),
    })
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    /// Constant features store 1 so they map to 0.
    pub stddev: Vec<f64>,
}

pub fn fit_standardizer(features: &Matrix) -> StandardizationParams {
    let n = features.rows().max(1) as f64;
    let mean: Vec<f64> = features.column_sums().iter().map(|s| s / n).collect();
    let mut var = vec![0.0; features.cols()];
    for i in 0..features.rows() {
        for (j, v) in features.row(i).iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
        }
    }
    let stddev = var
        .iter()
        .zip(&mean)
        .map(|(v, m)| {
            let sd = (v / n).sqrt();
            if sd <= 1e-12 * m.abs().max(1.0) {
                1.0
            } else {
                sd
            }
        })
        .collect();
    StandardizationParams { mean, stddev }
}

impl StandardizationParams {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        self.check(features)?;
        let mut out = features.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.stddev[j];
            }
        }
        Ok(out)
    }

    pub fn invert(&self, features: &Matrix) -> Result<Matrix> {
        self.check(features)?;
        let mut out = features.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.stddev[j] + self.mean[j];
            }
        }
        Ok(out)
    }

    fn check(&self, features: &Matrix) -> Result<()> {
        if features.cols() != self.len() {
            return Err(Error::Contract(format!(
                "standardizer fitted on {} features, applied to {}",
                self.len(),
                features.cols()
            )));
        }
        Ok(())
    }
}

pub fn apply_standardizer(ds: &Dataset, params: &StandardizationParams) -> Result<Dataset> {
    ds.with_features(params.apply(ds.features())?)
}

/// Parameters of the two-Gaussian generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticParams {
    pub n_majority: usize,
    pub n_minority: usize,
    pub n_features: usize,
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticParams {
    /// The 20,000 : 200 ten-feature benchmark with separation 3.
    pub fn standard(seed: u64) -> Self {
        Self {
            n_majority: 20_000,
            n_minority: 200,
            n_features: 10,
            class_separation: 3.0,
            seed,
        }
    }
}

/// Majority rows from N(0, I), minority rows from N(s·1, I). Majority rows
/// come first. Features are named `x1..xd`.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<Dataset> {
    let SyntheticParams {
        n_majority,
        n_minority,
        n_features: d,
        class_separation,
        seed,
    } = *params;
    if n_majority == 0 || n_minority == 0 || d == 0 {
        return Err(Error::Config(
            "synthetic generator needs at least one row per class and one feature".into(),
        ));
    }
    let mut rng = RngStream::new(seed, crate::SYNTHETIC_STREAM);
    let n = n_majority + n_minority;
    let features = Matrix::from_fn(n, d, |i, _| {
        let shift = if i < n_majority {
            0.0
        } else {
            class_separation
        };
        shift + rng.normal()
    });
    let labels = (0..n).map(|i| u8::from(i >= n_majority)).collect();
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(features, labels, names)
}
