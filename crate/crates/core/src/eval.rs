//! Class-averaged metrics, repeated cross-validation, and benchmark
//! reports.
//!
//! Metrics binarize the problem once per class (that class positive, the
//! rest negative) and average the binary scores; the plain fraction of
//! correct predictions is reported alongside because published tables do
//! not always say which convention they use. Cross-validation rebuilds the
//! coding matrix from each training fold by default; a `leaky_matrix`
//! switch reuses one matrix built from the full data instead.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{build_matrix, MatrixKind};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::pipeline::{
    fit_pipeline_with_matrix, Decoding, EcocModel, PipelineOptions, Standardizer,
};
use crate::rng::{mix, ROLE_MATRIX};

/// Metric bundle for one set of predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean over classes of the one-vs-rest binary accuracy.
    pub accuracy: f64,
    /// Mean over classes of the one-vs-rest precision.
    pub precision: f64,
    /// Mean over classes of the one-vs-rest recall.
    pub recall: f64,
    /// Mean over classes of the F-beta score.
    pub fscore: f64,
    /// Plain fraction of correct predictions.
    pub multiclass_accuracy: f64,
    /// Classes whose precision or recall denominator was zero (scored 0).
    pub degenerate_classes: Vec<usize>,
}

/// One-vs-rest confusion scores averaged over classes.
pub fn metrics(labels: &[usize], preds: &[usize], nc: usize, beta: f64) -> Result<MetricsReport> {
    if labels.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: preds.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("empty label sequence".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    if nc == 0 {
        return Err(Error::InvalidArgument("class count must be > 0".into()));
    }
    for &v in labels.iter().chain(preds.iter()) {
        if v >= nc {
            return Err(Error::InvalidArgument(format!(
                "class index {v} out of range (classes: {nc})"
            )));
        }
    }
    let m = labels.len() as f64;
    let beta2 = beta * beta;
    let mut acc_sum = 0.0;
    let mut prec_sum = 0.0;
    let mut rec_sum = 0.0;
    let mut f_sum = 0.0;
    let mut degenerate = Vec::new();
    let mut correct = 0usize;
    for (&t, &p) in labels.iter().zip(preds.iter()) {
        if t == p {
            correct += 1;
        }
    }
    for class in 0..nc {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&t, &p) in labels.iter().zip(preds.iter()) {
            match (t == class, p == class) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let tn = labels.len() - tp - fp - fn_;
        acc_sum += (tp + tn) as f64 / m;
        let mut flagged = false;
        let precision = if tp + fp == 0 {
            flagged = true;
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            flagged = true;
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let fscore = {
            let denom = beta2 * precision + recall;
            if denom == 0.0 {
                0.0
            } else {
                (beta2 + 1.0) * precision * recall / denom
            }
        };
        if flagged {
            degenerate.push(class);
        }
        prec_sum += precision;
        rec_sum += recall;
        f_sum += fscore;
    }
    let ncf = nc as f64;
    Ok(MetricsReport {
        accuracy: acc_sum / ncf,
        precision: prec_sum / ncf,
        recall: rec_sum / ncf,
        fscore: f_sum / ncf,
        multiclass_accuracy: correct as f64 / m,
        degenerate_classes: degenerate,
    })
}

/// The learner wiring a benchmark pairs with each matrix kind: KNN uses a
/// regressor on soft matrices and a classifier elsewhere, kernel ridge is a
/// regressor everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "base")]
pub enum LearnerBase {
    Knn { k: usize },
    KernelRidge { gamma: Option<f64>, lambda: f64 },
}

impl LearnerBase {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerBase::Knn { .. } => "knn",
            LearnerBase::KernelRidge { .. } => "kernel_ridge",
        }
    }

    /// Learner spec and decoding rule for one matrix kind.
    pub fn paired_spec(&self, kind: MatrixKind) -> (LearnerSpec, Decoding) {
        match self {
            LearnerBase::Knn { k } => {
                if kind == MatrixKind::Csecoc {
                    (LearnerSpec::knn_regressor(*k), Decoding::Euclidean)
                } else {
                    (LearnerSpec::knn_classifier(*k), Decoding::HammingTernary)
                }
            }
            LearnerBase::KernelRidge { gamma, lambda } => {
                (LearnerSpec::kernel_ridge(*gamma, *lambda), Decoding::Euclidean)
            }
        }
    }
}

/// Switches for one cross-validated run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CvOptions {
    pub standardize: bool,
    /// Build the coding matrix once from the full data instead of per
    /// training fold (test information leaks into the matrix).
    pub leaky_matrix: bool,
    /// Relabel with hard signs instead of soft entries.
    pub hard_targets: bool,
    pub eps: f64,
    /// Candidate draws for random matrix kinds.
    pub candidates: usize,
    pub beta: f64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            standardize: false,
            leaky_matrix: false,
            hard_targets: false,
            eps: crate::partition::DEFAULT_EPS,
            candidates: 1000,
            beta: 1.0,
        }
    }
}

/// Scores of a single train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub repeat: usize,
    pub fold: usize,
    pub accuracy: f64,
    pub fscore: f64,
    pub precision: f64,
    pub recall: f64,
    pub multiclass_accuracy: f64,
}

/// Mean and sample standard deviation of one metric over all splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

fn aggregate(values: impl Iterator<Item = f64> + Clone) -> Aggregate {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Aggregate {
        mean,
        std: var.sqrt(),
    }
}

/// One benchmark cell: a (dataset, method, learner) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvRow {
    pub dataset: String,
    pub method: MatrixKind,
    pub learner: String,
    pub decoding: String,
    pub ensemble_size: usize,
    pub accuracy: Aggregate,
    pub fscore: Aggregate,
    pub multiclass_accuracy: Aggregate,
    pub precision: Aggregate,
    pub recall: Aggregate,
    pub splits: Vec<SplitScore>,
    /// Set instead of scores when the cell failed.
    pub error: Option<String>,
    /// Best mean in its (dataset, learner) group, per metric.
    pub best_accuracy: bool,
    pub best_fscore: bool,
}

impl CvRow {
    fn failed(dataset: &str, method: MatrixKind, learner: &str, error: String) -> Self {
        let zero = Aggregate { mean: 0.0, std: 0.0 };
        CvRow {
            dataset: dataset.to_string(),
            method,
            learner: learner.to_string(),
            decoding: String::new(),
            ensemble_size: 0,
            accuracy: zero,
            fscore: zero,
            multiclass_accuracy: zero,
            precision: zero,
            recall: zero,
            splits: Vec::new(),
            error: Some(error),
            best_accuracy: false,
            best_fscore: false,
        }
    }
}

/// Runs `repeats x k` train/test cycles for one method and aggregates the
/// metrics. The coding matrix, any standardization, and all learners are
/// refit per split from the training fold only (unless `leaky_matrix`).
pub fn run_cv(
    dataset_name: &str,
    ds: &Dataset,
    kind: MatrixKind,
    base: &LearnerBase,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<CvRow> {
    let (spec, decoding) = base.paired_spec(kind);
    spec.validate()?;
    let seed = plan.seed();
    let full_matrix = if options.leaky_matrix {
        let matrix = if options.standardize && kind.is_tree() {
            let std = Standardizer::fit(ds.features());
            let transformed = ds.with_features(std.transform(ds.features()))?;
            build_matrix(
                &transformed,
                kind,
                options.eps,
                mix(seed, &[ROLE_MATRIX, kind.tag_for_seed()]),
                options.candidates,
            )?
        } else {
            build_matrix(
                ds,
                kind,
                options.eps,
                mix(seed, &[ROLE_MATRIX, kind.tag_for_seed()]),
                options.candidates,
            )?
        };
        Some(matrix)
    } else {
        None
    };
    let pipe_options = PipelineOptions {
        standardize: options.standardize,
        hard_targets: options.hard_targets,
    };
    let k = plan.k();
    let splits: Vec<Result<SplitScore>> = (0..plan.repeats() * k)
        .into_par_iter()
        .map(|split| {
            let repeat = split / k;
            let fold = split % k;
            let train_idx = plan.train_indices(repeat, fold);
            let test_idx = plan.test_indices(repeat, fold);
            let train = ds.subset(&train_idx)?;
            let model: EcocModel = match &full_matrix {
                Some(matrix) => fit_pipeline_with_matrix(
                    &train,
                    matrix.clone(),
                    &spec,
                    decoding,
                    &pipe_options,
                )?,
                None => crate::pipeline::fit_pipeline(
                    &train,
                    kind,
                    &spec,
                    decoding,
                    &pipe_options,
                    options.eps,
                    mix(
                        seed,
                        &[
                            ROLE_MATRIX,
                            kind.tag_for_seed(),
                            repeat as u64,
                            fold as u64,
                        ],
                    ),
                    options.candidates,
                )?,
            };
            let mut labels = Vec::with_capacity(test_idx.len());
            let mut preds = Vec::with_capacity(test_idx.len());
            for &i in &test_idx {
                labels.push(ds.labels()[i]);
                preds.push(model.predict(ds.row(i))?);
            }
            let scores = metrics(&labels, &preds, ds.n_classes(), options.beta)?;
            Ok(SplitScore {
                repeat,
                fold,
                accuracy: scores.accuracy,
                fscore: scores.fscore,
                precision: scores.precision,
                recall: scores.recall,
                multiclass_accuracy: scores.multiclass_accuracy,
            })
        })
        .collect();
    let mut resolved = Vec::with_capacity(splits.len());
    for s in splits {
        resolved.push(s?);
    }
    resolved.sort_by_key(|s| (s.repeat, s.fold));
    Ok(CvRow {
        dataset: dataset_name.to_string(),
        method: kind,
        learner: base.name().to_string(),
        decoding: decoding.to_string(),
        ensemble_size: kind.ensemble_size(ds.n_classes()),
        accuracy: aggregate(resolved.iter().map(|s| s.accuracy)),
        fscore: aggregate(resolved.iter().map(|s| s.fscore)),
        multiclass_accuracy: aggregate(resolved.iter().map(|s| s.multiclass_accuracy)),
        precision: aggregate(resolved.iter().map(|s| s.precision)),
        recall: aggregate(resolved.iter().map(|s| s.recall)),
        splits: resolved,
        error: None,
        best_accuracy: false,
        best_fscore: false,
    })
}

/// Full effective configuration echoed into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub standardize: bool,
    pub leaky_matrix: bool,
    pub hard_targets: bool,
    pub eps: f64,
    pub candidates: usize,
    pub beta: f64,
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub learners: Vec<LearnerBase>,
    /// Free-form effective-configuration entries (CSV schema, dataset
    /// paths, worker count) merged in by the caller.
    pub decision_flags: BTreeMap<String, String>,
    pub report_format_version: u32,
}

/// Choices a reader needs to interpret the numbers; recorded verbatim in
/// every report.
fn decision_flags(options: &CvOptions) -> BTreeMap<String, String> {
    let mut flags = BTreeMap::new();
    flags.insert(
        "accuracy_definitions".into(),
        "class_averaged_binary (accuracy) and plain fraction correct (multiclass_accuracy)".into(),
    );
    flags.insert(
        "coverage_fold".into(),
        "coverage computed on the training fold only".into(),
    );
    flags.insert(
        "denominator_clamp".into(),
        format!("partition score denominator clamped to eps = {}", options.eps),
    );
    flags.insert(
        "inner_distance_normalization".into(),
        "mean pairwise centroid distance, 2/(T(T-1))".into(),
    );
    flags.insert(
        "matrix_rebuild".into(),
        if options.leaky_matrix {
            "once on the full data (leaky)".into()
        } else {
            "per training fold".into()
        },
    );
    flags.insert(
        "missing_values".into(),
        "rows with missing features dropped at load time unless mean_impute is chosen".into(),
    );
    flags.insert("std_definition".into(), "sample std over split scores (n-1)".into());
    flags.insert(
        "targets".into(),
        if options.hard_targets {
            "hard signs (soft rows used only at decoding)".into()
        } else {
            "soft matrix entries".into()
        },
    );
    flags
}

/// Version tag for persisted reports.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Rows plus metadata; serializes deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: RunMetadata,
    pub rows: Vec<CvRow>,
}

/// A dataset by name, or the load error that will mark its cells failed.
pub type NamedDataset = (String, std::result::Result<Dataset, String>);

/// Cross product of datasets, methods, and learner bases. Failed cells
/// (load errors included) are recorded and the run continues.
pub fn benchmark(
    datasets: &[NamedDataset],
    methods: &[MatrixKind],
    bases: &[LearnerBase],
    k: usize,
    repeats: usize,
    seed: u64,
    options: &CvOptions,
) -> EvalReport {
    let mut rows = Vec::new();
    for (name, loaded) in datasets {
        let plan = match loaded {
            Ok(ds) => stratified_plan_or_none(ds, k, repeats, seed).map(|p| (ds, p)),
            Err(e) => Err(e.clone()),
        };
        for base in bases {
            for &method in methods {
                let row = match &plan {
                    Ok((ds, plan)) => run_cv(name, ds, method, base, plan, options)
                        .unwrap_or_else(|e| CvRow::failed(name, method, base.name(), e.to_string())),
                    Err(e) => CvRow::failed(name, method, base.name(), e.clone()),
                };
                rows.push(row);
            }
        }
    }
    mark_best(&mut rows);
    EvalReport {
        metadata: RunMetadata {
            seed,
            folds: k,
            repeats,
            standardize: options.standardize,
            leaky_matrix: options.leaky_matrix,
            hard_targets: options.hard_targets,
            eps: options.eps,
            candidates: options.candidates,
            beta: options.beta,
            datasets: datasets.iter().map(|(name, _)| name.clone()).collect(),
            methods: methods.iter().map(|m| m.to_string()).collect(),
            learners: bases.to_vec(),
            decision_flags: decision_flags(options),
            report_format_version: REPORT_FORMAT_VERSION,
        },
        rows,
    }
}

fn stratified_plan_or_none(
    ds: &Dataset,
    k: usize,
    repeats: usize,
    seed: u64,
) -> std::result::Result<FoldPlan, String> {
    crate::data::stratified_folds(ds, k, repeats, seed).map_err(|e| e.to_string())
}

fn mark_best(rows: &mut [CvRow]) {
    let groups: Vec<(String, String)> = rows
        .iter()
        .map(|r| (r.dataset.clone(), r.learner.clone()))
        .collect();
    let mut unique = groups.clone();
    unique.sort();
    unique.dedup();
    for (dataset, learner) in unique {
        let in_group = |r: &CvRow| r.dataset == dataset && r.learner == learner && r.error.is_none();
        let best_acc = rows
            .iter()
            .filter(|r| in_group(r))
            .map(|r| r.accuracy.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_f = rows
            .iter()
            .filter(|r| in_group(r))
            .map(|r| r.fscore.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        for r in rows.iter_mut() {
            if r.dataset == dataset && r.learner == learner && r.error.is_none() {
                r.best_accuracy = r.accuracy.mean == best_acc;
                r.best_fscore = r.fscore.mean == best_f;
            }
        }
    }
}

impl EvalReport {
    /// Deterministic machine-readable form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Aligned text table, percentages with the best mean per
    /// (dataset, learner) group starred.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:<13} {:<12} {:>4}  {:>14} {:>14} {:>14}\n",
            "dataset", "method", "learner", "size", "accuracy", "fscore", "plain-acc"
        ));
        let dashes = "-".repeat(94);
        out.push_str(&dashes);
        out.push('\n');
        for row in &self.rows {
            if let Some(err) = &row.error {
                out.push_str(&format!(
                    "{:<14} {:<13} {:<12} FAILED: {err}\n",
                    row.dataset, row.method, row.learner
                ));
                continue;
            }
            let cell = |a: &Aggregate, star: bool| {
                format!(
                    "{:>5.1}±{:<5.2}{}",
                    100.0 * a.mean,
                    100.0 * a.std,
                    if star { "*" } else { " " }
                )
            };
            out.push_str(&format!(
                "{:<14} {:<13} {:<12} {:>4}  {:>14} {:>14} {:>14}\n",
                row.dataset,
                row.method.to_string(),
                row.learner,
                row.ensemble_size,
                cell(&row.accuracy, row.best_accuracy),
                cell(&row.fscore, row.best_fscore),
                cell(&row.multiclass_accuracy, false),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{iris, point_classes};
    use approx::assert_abs_diff_eq;

    #[test]
    fn metrics_perfect_predictions() {
        let labels = vec![0, 1, 2, 0, 1, 2];
        let report = metrics(&labels, &labels, 3, 1.0).unwrap();
        assert_abs_diff_eq!(report.accuracy, 1.0);
        assert_abs_diff_eq!(report.fscore, 1.0);
        assert_abs_diff_eq!(report.multiclass_accuracy, 1.0);
        assert!(report.degenerate_classes.is_empty());
    }

    #[test]
    fn metrics_hand_computed_confusion() {
        // labels (0,0,1,1,2,2), preds (0,0,1,1,2,1):
        // accuracy = mean(6/6, 5/6, 5/6) = 8/9, fscore = mean(1, 0.8, 2/3)
        let labels = vec![0, 0, 1, 1, 2, 2];
        let preds = vec![0, 0, 1, 1, 2, 1];
        let report = metrics(&labels, &preds, 3, 1.0).unwrap();
        assert_abs_diff_eq!(report.accuracy, 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            report.fscore,
            (1.0 + 0.8 + 2.0 / 3.0) / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(report.multiclass_accuracy, 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn metrics_large_beta_approaches_recall() {
        let labels = vec![0, 0, 1, 1, 2, 2, 0, 1];
        let preds = vec![0, 1, 1, 1, 2, 0, 0, 2];
        let base = metrics(&labels, &preds, 3, 1.0).unwrap();
        let heavy = metrics(&labels, &preds, 3, 1000.0).unwrap();
        assert_abs_diff_eq!(heavy.fscore, base.recall, epsilon = 1e-3);
    }

    #[test]
    fn metrics_class_averaged_accuracy_dominates_plain() {
        let labels = vec![0, 0, 1, 1, 2, 2];
        let preds = vec![0, 1, 1, 2, 2, 0];
        let report = metrics(&labels, &preds, 3, 1.0).unwrap();
        assert!(report.accuracy >= report.multiclass_accuracy);
    }

    #[test]
    fn metrics_permutation_invariance() {
        let labels = vec![0, 1, 2, 2, 1, 0, 1];
        let preds = vec![0, 2, 2, 1, 1, 0, 0];
        let a = metrics(&labels, &preds, 3, 1.0).unwrap();
        let perm = [3, 0, 6, 1, 5, 2, 4];
        let labels_p: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
        let preds_p: Vec<usize> = perm.iter().map(|&i| preds[i]).collect();
        let b = metrics(&labels_p, &preds_p, 3, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn metrics_flags_missing_predicted_class() {
        let labels = vec![0, 1, 1, 0];
        let preds = vec![0, 0, 0, 0]; // class 1 never predicted
        let report = metrics(&labels, &preds, 2, 1.0).unwrap();
        assert_eq!(report.degenerate_classes, vec![1]);
        assert_abs_diff_eq!(report.precision, 0.25); // (0.5 + 0) / 2
    }

    #[test]
    fn metrics_input_validation() {
        assert!(metrics(&[0], &[], 2, 1.0).is_err());
        assert!(metrics(&[], &[], 2, 1.0).is_err());
        assert!(metrics(&[0, 1], &[0, 1], 2, 0.0).is_err());
        assert!(metrics(&[0, 5], &[0, 1], 2, 1.0).is_err());
    }

    #[test]
    fn run_cv_on_iris_smoke() {
        let ds = iris();
        let plan = crate::data::stratified_folds(&ds, 5, 1, 7).unwrap();
        let row = run_cv(
            "iris",
            &ds,
            MatrixKind::Csecoc,
            &LearnerBase::Knn { k: 5 },
            &plan,
            &CvOptions::default(),
        )
        .unwrap();
        assert_eq!(row.splits.len(), 5);
        assert!(row.multiclass_accuracy.mean > 0.8);
        assert_eq!(row.ensemble_size, 2);
    }

    #[test]
    fn run_cv_is_deterministic() {
        let ds = iris();
        let plan = crate::data::stratified_folds(&ds, 4, 2, 13).unwrap();
        let opts = CvOptions::default();
        let base = LearnerBase::Knn { k: 5 };
        let a = run_cv("iris", &ds, MatrixKind::SparseRandom, &base, &plan, &opts).unwrap();
        let b = run_cv("iris", &ds, MatrixKind::SparseRandom, &base, &plan, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn leave_one_out_shape() {
        // repeats = 1, k = m on a tiny balanced set: every split holds one
        // test sample and the report carries m split scores
        let ds = point_classes(&[0.0, 1.0, 8.0, 9.0], 5);
        let k = ds.n_samples();
        let plan = crate::data::stratified_folds(&ds, k, 1, 3);
        // per-class count (5) < k (20), so stratification must reject this
        assert!(plan.is_err());
        // leave-one-out within stratification limits: k = 5 on 5-per-class
        let plan = crate::data::stratified_folds(&ds, 5, 1, 3).unwrap();
        let row = run_cv(
            "toy",
            &ds,
            MatrixKind::Ova,
            &LearnerBase::Knn { k: 3 },
            &plan,
            &CvOptions::default(),
        )
        .unwrap();
        assert_eq!(row.splits.len(), 5);
        assert!(row.accuracy.std >= 0.0);
    }

    #[test]
    fn benchmark_reports_failed_cells_and_continues() {
        let ds = point_classes(&[0.0, 1.0, 9.0], 4);
        let report = benchmark(
            &[("toy".into(), Ok(ds))],
            &[MatrixKind::Ova, MatrixKind::Csecoc],
            &[LearnerBase::Knn { k: 3 }],
            8, // classes have 4 samples each: stratification fails
            1,
            1,
            &CvOptions::default(),
        );
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.error.is_some()));
        let table = report.render_table();
        assert!(table.contains("FAILED"));
    }

    #[test]
    fn benchmark_empty_methods_is_empty_success() {
        let ds = point_classes(&[0.0, 9.0], 4);
        let report = benchmark(
            &[("toy".into(), Ok(ds))],
            &[],
            &[LearnerBase::Knn { k: 1 }],
            2,
            1,
            1,
            &CvOptions::default(),
        );
        assert!(report.rows.is_empty());
    }

    #[test]
    fn benchmark_marks_best_rows() {
        let ds = iris();
        let report = benchmark(
            &[("iris".into(), Ok(ds))],
            &[MatrixKind::Ova, MatrixKind::Csecoc],
            &[LearnerBase::Knn { k: 5 }],
            3,
            1,
            21,
            &CvOptions::default(),
        );
        let best_acc = report
            .rows
            .iter()
            .map(|r| r.accuracy.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(report.rows.iter().any(|r| r.best_accuracy));
        for r in &report.rows {
            assert_eq!(r.best_accuracy, r.accuracy.mean == best_acc);
        }
        assert!(report.rows.iter().any(|r| r.best_fscore));
    }

    #[test]
    fn aggregation_reproduces_from_split_scores() {
        let ds = iris();
        let plan = crate::data::stratified_folds(&ds, 5, 2, 77).unwrap();
        let row = run_cv(
            "iris",
            &ds,
            MatrixKind::Ova,
            &LearnerBase::Knn { k: 5 },
            &plan,
            &CvOptions::default(),
        )
        .unwrap();
        let recomputed = aggregate(row.splits.iter().map(|s| s.accuracy));
        assert_eq!(recomputed.mean, row.accuracy.mean);
        assert_eq!(recomputed.std, row.accuracy.std);
    }
}
