//! Per-column training and least-loss decoding.
//!
//! Each coding-matrix column defines one base problem: samples whose class
//! entry is zero are excluded, the rest are relabeled with the entry itself
//! (soft matrices hand the learner a real target, hard matrices `±1`). An
//! unknown sample is pushed through every column learner and assigned to the
//! class whose codeword row is nearest to the output vector.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::coding::{build_matrix, CodingMatrix, MatrixKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit, LearnerSpec, TrainedLearner};

/// Loss used to compare learner outputs against codeword rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoding {
    /// Squared Euclidean distance to each row; required for soft matrices.
    Euclidean,
    /// Attenuated Hamming distance `(1 - sign(o) * M_rl) / 2` per column,
    /// zero entries cost one half; only meaningful for classifier outputs.
    HammingTernary,
}

impl std::fmt::Display for Decoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decoding::Euclidean => "euclidean",
            Decoding::HammingTernary => "hamming_ternary",
        })
    }
}

impl std::str::FromStr for Decoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Decoding::Euclidean),
            "hamming_ternary" => Ok(Decoding::HammingTernary),
            other => Err(Error::InvalidArgument(format!(
                "unknown decoding rule `{other}`"
            ))),
        }
    }
}

/// Per-feature z-score parameters, fit on training data only. Constant
/// features keep a unit scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: ArrayView2<'_, f64>) -> Self {
        let n = features.nrows().max(1) as f64;
        let lf = features.ncols();
        let mut mean = vec![0.0; lf];
        for row in features.rows() {
            for (j, &v) in row.iter().enumerate() {
                mean[j] += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut scale = vec![0.0; lf];
        for row in features.rows() {
            for (j, &v) in row.iter().enumerate() {
                scale[j] += (v - mean[j]) * (v - mean[j]);
            }
        }
        for s in &mut scale {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Self { mean, scale }
    }

    pub fn transform_row(&self, row: ArrayView1<'_, f64>) -> Array1<f64> {
        Array1::from_iter(
            row.iter()
                .zip(self.mean.iter().zip(self.scale.iter()))
                .map(|(&v, (&m, &s))| (v - m) / s),
        )
    }

    pub fn transform(&self, features: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = features.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

/// Training switches shared by the pipeline and the CV harness.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Fit a z-score pass on the training fold and apply it everywhere.
    pub standardize: bool,
    /// Relabel columns with `sign(entry)` instead of the soft entry value;
    /// decoding still uses the soft rows.
    pub hard_targets: bool,
}

/// A coding matrix paired with one trained learner per column and a
/// decoding rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EcocModel {
    matrix: CodingMatrix,
    learners: Vec<TrainedLearner>,
    decoding: Decoding,
    standardizer: Option<Standardizer>,
}

fn column_sets(
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    matrix: &CodingMatrix,
    column: usize,
    hard_targets: bool,
) -> Result<(Array2<f64>, Vec<f64>)> {
    if column >= matrix.n_columns() {
        return Err(Error::InvalidArgument(format!(
            "column {column} out of range"
        )));
    }
    let keep: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &label)| matrix.value(label, column) != 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut x = Array2::<f64>::zeros((keep.len(), features.ncols()));
    let mut y = Vec::with_capacity(keep.len());
    for (r, &i) in keep.iter().enumerate() {
        x.row_mut(r).assign(&features.row(i));
        let entry = matrix.value(labels[i], column);
        y.push(if hard_targets { entry.signum() } else { entry });
    }
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !has_pos || !has_neg {
        return Err(Error::DegenerateColumn { column });
    }
    Ok((x, y))
}

/// Training set for one column: exactly the samples whose class entry is
/// nonzero, each labeled with that entry. Errors if the surviving targets
/// carry a single sign (degenerate column).
pub fn column_training_set(
    ds: &Dataset,
    matrix: &CodingMatrix,
    column: usize,
) -> Result<(Array2<f64>, Vec<f64>)> {
    column_sets(ds.features(), ds.labels(), matrix, column, false)
}

/// `sign(0) = 0`, so zero entries cost one half in the attenuated Hamming
/// loss.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Maps a vector of column outputs to the class with the least decoding
/// loss; ties resolve to the lowest class index.
pub fn decode(outputs: &[f64], matrix: &CodingMatrix, rule: Decoding) -> Result<usize> {
    if outputs.len() != matrix.n_columns() {
        return Err(Error::LengthMismatch {
            left: outputs.len(),
            right: matrix.n_columns(),
        });
    }
    if outputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite learner output".into()));
    }
    let mut best = 0usize;
    let mut best_loss = f64::INFINITY;
    for r in 0..matrix.n_classes() {
        let loss: f64 = match rule {
            Decoding::Euclidean => (0..matrix.n_columns())
                .map(|l| {
                    let d = outputs[l] - matrix.value(r, l);
                    d * d
                })
                .sum(),
            Decoding::HammingTernary => (0..matrix.n_columns())
                .map(|l| (1.0 - sign(outputs[l]) * matrix.value(r, l)) / 2.0)
                .sum(),
        };
        if loss < best_loss {
            best_loss = loss;
            best = r;
        }
    }
    Ok(best)
}

/// Trains one learner per matrix column with default options.
pub fn train_ecoc(
    ds: &Dataset,
    matrix: CodingMatrix,
    spec: &LearnerSpec,
    decoding: Decoding,
) -> Result<EcocModel> {
    train_ecoc_opts(ds, matrix, spec, decoding, &PipelineOptions::default())
}

/// Trains one learner per matrix column.
///
/// With `standardize` on, a z-score pass is fit on `ds` and applied to the
/// training features; the model keeps it for prediction. The decoding rule
/// must be compatible: `hamming_ternary` needs classifier learners and soft
/// (`csecoc`) matrices need `euclidean`.
pub fn train_ecoc_opts(
    ds: &Dataset,
    matrix: CodingMatrix,
    spec: &LearnerSpec,
    decoding: Decoding,
    options: &PipelineOptions,
) -> Result<EcocModel> {
    if matrix.n_classes() != ds.n_classes() {
        return Err(Error::LengthMismatch {
            left: matrix.n_classes(),
            right: ds.n_classes(),
        });
    }
    if decoding == Decoding::HammingTernary && !spec.family.is_classifier() {
        return Err(Error::InvalidArgument(
            "hamming_ternary decoding requires classifier learners".into(),
        ));
    }
    if matrix.kind() == MatrixKind::Csecoc && decoding != Decoding::Euclidean {
        return Err(Error::InvalidArgument(
            "soft matrices decode with euclidean loss".into(),
        ));
    }
    let standardizer = options.standardize.then(|| Standardizer::fit(ds.features()));
    let features = match &standardizer {
        Some(s) => s.transform(ds.features()),
        None => ds.features().to_owned(),
    };
    // classifiers handle soft entries through their sign
    let hard = options.hard_targets || spec.family.is_classifier();
    let mut learners = Vec::with_capacity(matrix.n_columns());
    for column in 0..matrix.n_columns() {
        let (x, y) = column_sets(features.view(), ds.labels(), &matrix, column, hard)?;
        learners.push(fit(spec, x.view(), &y)?);
    }
    Ok(EcocModel {
        matrix,
        learners,
        decoding,
        standardizer,
    })
}

/// Builds the coding matrix for `kind` from `ds` (standardized first when
/// requested) and trains the model on it.
pub fn fit_pipeline(
    ds: &Dataset,
    kind: MatrixKind,
    spec: &LearnerSpec,
    decoding: Decoding,
    options: &PipelineOptions,
    eps: f64,
    seed: u64,
    candidates: usize,
) -> Result<EcocModel> {
    let matrix = if options.standardize && kind.is_tree() {
        let std = Standardizer::fit(ds.features());
        let transformed = ds.with_features(std.transform(ds.features()))?;
        build_matrix(&transformed, kind, eps, seed, candidates)?
    } else {
        build_matrix(ds, kind, eps, seed, candidates)?
    };
    train_ecoc_opts(ds, matrix, spec, decoding, options)
}

/// Trains against a matrix built elsewhere (e.g. once on the full data).
pub fn fit_pipeline_with_matrix(
    ds: &Dataset,
    matrix: CodingMatrix,
    spec: &LearnerSpec,
    decoding: Decoding,
    options: &PipelineOptions,
) -> Result<EcocModel> {
    train_ecoc_opts(ds, matrix, spec, decoding, options)
}

impl EcocModel {
    pub fn matrix(&self) -> &CodingMatrix {
        &self.matrix
    }

    pub fn decoding(&self) -> Decoding {
        self.decoding
    }

    pub fn standardizer(&self) -> Option<&Standardizer> {
        self.standardizer.as_ref()
    }

    pub fn learners(&self) -> &[TrainedLearner] {
        &self.learners
    }

    /// Raw column outputs for one sample (after standardization).
    pub fn outputs(&self, x: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
        let transformed;
        let query = match &self.standardizer {
            Some(s) => {
                transformed = s.transform_row(x);
                transformed.view()
            }
            None => x,
        };
        self.learners.iter().map(|l| l.predict(query)).collect()
    }

    /// Class index for one sample.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<usize> {
        decode(&self.outputs(x)?, &self.matrix, self.decoding)
    }

    /// [`predict`](Self::predict) over a plain slice.
    pub fn predict_slice(&self, x: &[f64]) -> Result<usize> {
        self.predict(ArrayView1::from(x))
    }

    /// Predicted class name for one sample.
    pub fn predict_name(&self, x: ArrayView1<'_, f64>) -> Result<&str> {
        Ok(&self.matrix.class_names()[self.predict(x)?])
    }
}

/// Version tag for persisted models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: EcocModel,
}

/// Persists a model (matrix, learner states, decoding, preprocessing) as
/// version-tagged JSON.
pub fn save_model(model: &EcocModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let json = serde_json::to_string(&file)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    std::fs::write(path, json).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Loads a model persisted by [`save_model`], rejecting unknown versions.
pub fn load_model(path: impl AsRef<Path>) -> Result<EcocModel> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: ModelFile =
        serde_json::from_str(&json).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported model format version {}",
            file.format_version
        )));
    }
    Ok(file.model)
}
