//! Dataset ingestion, class statistics, and deterministic stratified folds.
//!
//! A [`Dataset`] is an immutable labeled feature matrix with a contiguous
//! class index map. Class indices are assigned in order of first appearance
//! in the source file and the original label strings are kept in
//! `class_names` so reports can use them.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, ROLE_FOLDS};

/// Immutable labeled feature matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    class_counts: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from parts, validating every invariant: finite
    /// features, label indices inside `[0, class_names.len())`, at least two
    /// classes, and no empty class.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let m = features.nrows();
        if m == 0 {
            return Err(Error::InvalidData("dataset has zero rows".into()));
        }
        if labels.len() != m {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: m,
            });
        }
        let nc = class_names.len();
        if nc < 2 {
            return Err(Error::TooFewClasses);
        }
        if let Some(bad) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature value {bad}"
            )));
        }
        let mut class_counts = vec![0usize; nc];
        for &label in &labels {
            if label >= nc {
                return Err(Error::InvalidData(format!(
                    "label index {label} out of range (classes: {nc})"
                )));
            }
            class_counts[label] += 1;
        }
        if let Some(empty) = class_counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidData(format!(
                "class `{}` has zero samples",
                class_names[empty]
            )));
        }
        Ok(Self {
            features,
            labels,
            class_names,
            class_counts,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Componentwise mean of all samples labeled `class`, accumulated in
    /// sample-index order.
    pub fn class_centroid(&self, class: usize) -> Result<Array1<f64>> {
        if class >= self.n_classes() {
            return Err(Error::InvalidArgument(format!(
                "class index {class} out of range"
            )));
        }
        let mut sum = Array1::<f64>::zeros(self.n_features());
        for (i, &label) in self.labels.iter().enumerate() {
            if label == class {
                sum += &self.features.row(i);
            }
        }
        Ok(sum / self.class_counts[class] as f64)
    }

    /// New dataset restricted to `indices` (in the given order), keeping the
    /// full class map. Errors if a class loses all samples.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::InvalidData("empty subset".into()));
        }
        let mut features = Array2::<f64>::zeros((indices.len(), self.n_features()));
        let mut labels = Vec::with_capacity(indices.len());
        for (r, &i) in indices.iter().enumerate() {
            if i >= self.n_samples() {
                return Err(Error::InvalidArgument(format!(
                    "sample index {i} out of range"
                )));
            }
            features.row_mut(r).assign(&self.features.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(features, labels, self.class_names.clone())
    }

    /// Same labels and class map, different feature matrix (used by the
    /// standardization pass).
    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        if features.nrows() != self.n_samples() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: self.n_samples(),
            });
        }
        Dataset::new(features, self.labels.clone(), self.class_names.clone())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    Last,
    Index(usize),
}

/// What to do with rows whose feature fields are missing or unparseable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    DropRow,
    MeanImpute,
}

/// CSV layout description. Dialect: comma separator, `.` decimal point,
/// optional single header row. Empty fields and `?` count as missing.
#[derive(Debug, Clone, Copy)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub missing_policy: MissingPolicy,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            has_header: true,
            missing_policy: MissingPolicy::DropRow,
        }
    }
}

fn parse_field(field: &str) -> Option<f64> {
    let field = field.trim();
    if field.is_empty() || field == "?" {
        return None;
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}

/// Loads a CSV file into a [`Dataset`] according to `schema`.
///
/// Class indices are contiguous and assigned in order of first appearance
/// among retained rows. Rows with missing feature values are dropped or
/// mean-imputed per `schema.missing_policy`; the imputation mean is the
/// per-column mean of the parseable values over the whole file.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: display.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv {
                path: display.clone(),
                message: e.to_string(),
            },
        })?;

    let mut raw_rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut n_fields = None;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: display.clone(),
            message: e.to_string(),
        })?;
        let len = record.len();
        let expected = *n_fields.get_or_insert(len);
        if len != expected {
            return Err(Error::Csv {
                path: display.clone(),
                message: format!("row {row_idx} has {len} fields, expected {expected}"),
            });
        }
        if len < 2 {
            return Err(Error::Csv {
                path: display.clone(),
                message: "rows need at least one feature and one label field".into(),
            });
        }
        let label_idx = match schema.label_column {
            LabelColumn::First => 0,
            LabelColumn::Last => len - 1,
            LabelColumn::Index(i) => {
                if i >= len {
                    return Err(Error::Csv {
                        path: display.clone(),
                        message: format!("label column {i} out of range ({len} fields)"),
                    });
                }
                i
            }
        };
        let label = record[label_idx].trim();
        if label.is_empty() || label == "?" {
            return Err(Error::Csv {
                path: display.clone(),
                message: format!("row {row_idx} has an empty label"),
            });
        }
        raw_labels.push(label.to_string());
        raw_rows.push(
            record
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != label_idx)
                .map(|(_, f)| parse_field(f))
                .collect(),
        );
    }
    if raw_rows.is_empty() {
        return Err(Error::InvalidData(format!("`{display}` has no data rows")));
    }

    let lf = raw_rows[0].len();
    let keep: Vec<usize> = match schema.missing_policy {
        MissingPolicy::DropRow => (0..raw_rows.len())
            .filter(|&r| raw_rows[r].iter().all(|v| v.is_some()))
            .collect(),
        MissingPolicy::MeanImpute => {
            let mut sums = vec![0.0f64; lf];
            let mut counts = vec![0usize; lf];
            for row in &raw_rows {
                for (j, v) in row.iter().enumerate() {
                    if let Some(v) = v {
                        sums[j] += v;
                        counts[j] += 1;
                    }
                }
            }
            for (j, &c) in counts.iter().enumerate() {
                if c == 0 {
                    return Err(Error::InvalidData(format!(
                        "feature column {j} has no parseable values to impute from"
                    )));
                }
            }
            for row in &mut raw_rows {
                for (j, v) in row.iter_mut().enumerate() {
                    if v.is_none() {
                        *v = Some(sums[j] / counts[j] as f64);
                    }
                }
            }
            (0..raw_rows.len()).collect()
        }
    };
    if keep.is_empty() {
        return Err(Error::InvalidData(format!(
            "`{display}` has zero rows after dropping rows with missing values"
        )));
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(keep.len());
    let mut features = Array2::<f64>::zeros((keep.len(), lf));
    for (r, &i) in keep.iter().enumerate() {
        let idx = match class_names.iter().position(|n| *n == raw_labels[i]) {
            Some(idx) => idx,
            None => {
                class_names.push(raw_labels[i].clone());
                class_names.len() - 1
            }
        };
        labels.push(idx);
        for (j, v) in raw_rows[i].iter().enumerate() {
            features[(r, j)] = v.expect("missing values resolved above");
        }
    }
    Dataset::new(features, labels, class_names)
}

/// Stratified cross-validation assignments: `repeats` tables mapping each
/// sample index to a fold id in `[0, k)`.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    assignments: Vec<Vec<u32>>,
    k: usize,
    repeats: usize,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold id of `sample` within `repeat`.
    pub fn fold_of(&self, repeat: usize, sample: usize) -> usize {
        self.assignments[repeat][sample] as usize
    }

    pub fn test_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        self.assignments[repeat]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f as usize == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, repeat: usize, fold: usize) -> Vec<usize> {
        self.assignments[repeat]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f as usize != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Builds a deterministic stratified fold plan.
///
/// Within each repeat, the samples of every class are shuffled with a
/// ChaCha8 stream seeded from `(seed, ROLE_FOLDS, repeat, class)` (see
/// [`crate::rng`]) and dealt round-robin into the `k` folds starting at a
/// random offset, so per-class fold sizes differ by at most one. The plan is
/// a pure function of `(labels, k, repeats, seed)`.
pub fn stratified_folds(ds: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count {k} < 2")));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    for (c, &count) in ds.class_counts().iter().enumerate() {
        if count < k {
            return Err(Error::ClassSmallerThanFolds {
                name: ds.class_names()[c].clone(),
                count,
                folds: k,
            });
        }
    }
    let m = ds.n_samples();
    let mut assignments = Vec::with_capacity(repeats);
    for repeat in 0..repeats {
        let mut table = vec![0u32; m];
        for class in 0..ds.n_classes() {
            let mut members: Vec<usize> = (0..m).filter(|&i| ds.labels()[i] == class).collect();
            let mut rng = seeded_rng(seed, &[ROLE_FOLDS, repeat as u64, class as u64]);
            members.shuffle(&mut rng);
            let rotation = rng.random_range(0..k);
            for (pos, &i) in members.iter().enumerate() {
                table[i] = ((pos + rotation) % k) as u32;
            }
        }
        assignments.push(table);
    }
    Ok(FoldPlan {
        assignments,
        k,
        repeats,
        seed,
    })
}
