//! Brute-force reference checks.
//!
//! Everything here recomputes a quantity along an independent code path —
//! flat loops, a full confusion matrix, exhaustive enumeration — and
//! compares against the production implementation. The `oracle-check`
//! subcommand runs the whole suite; the acceptance tests reuse individual
//! checks.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coding::{build_csecoc, coverage, validate_matrix};
use crate::data::Dataset;
use crate::error::Result;
use crate::eval::metrics;
use crate::partition::{
    exhaustive_bipartition, partition_score, sffs_bipartition, ClassPartition,
};
use crate::rng::{seeded_rng, ROLE_ORACLE};

/// Result of one reference comparison. `hard` outcomes must pass; soft ones
/// are reported only.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub name: String,
    pub passed: bool,
    pub hard: bool,
    pub detail: String,
}

impl OracleOutcome {
    fn new(name: impl Into<String>, passed: bool, hard: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            hard,
            detail,
        }
    }
}

/// Random clustered dataset: 2-5 classes, up to 200 samples, Gaussian
/// scatter around class centers.
pub fn synthetic_dataset(seed: u64, index: u64) -> Dataset {
    let mut rng = seeded_rng(seed, &[ROLE_ORACLE, index]);
    let nc = rng.random_range(2..=5usize);
    let lf = rng.random_range(2..=6usize);
    let counts: Vec<usize> = (0..nc).map(|_| rng.random_range(5..=40usize)).collect();
    let m: usize = counts.iter().sum();
    let mut features = Array2::<f64>::zeros((m, lf));
    let mut labels = Vec::with_capacity(m);
    let centers: Vec<Vec<f64>> = (0..nc)
        .map(|_| (0..lf).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let mut row = 0;
    for (c, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            for j in 0..lf {
                let noise: f64 = StandardNormal.sample(&mut rng);
                features[(row, j)] = centers[c][j] + noise;
            }
            labels.push(c);
            row += 1;
        }
    }
    let names = (0..nc).map(|c| format!("C{c}")).collect();
    Dataset::new(features, labels, names).expect("synthetic dataset is valid")
}

/// Flat-loop group centroid, written independently of the partition module.
fn flat_group_centroid(ds: &Dataset, group: &[usize]) -> Vec<f64> {
    let lf = ds.n_features();
    let mut sum = vec![0.0; lf];
    let mut count = 0usize;
    for i in 0..ds.n_samples() {
        if group.contains(&ds.labels()[i]) {
            for j in 0..lf {
                sum[j] += ds.features()[(i, j)];
            }
            count += 1;
        }
    }
    for v in &mut sum {
        *v /= count as f64;
    }
    sum
}

fn flat_distance(ds: &Dataset, i: usize, center: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, &c) in center.iter().enumerate() {
        let d = ds.features()[(i, j)] - c;
        s += d * d;
    }
    s.sqrt()
}

/// Per-sample nearest-centroid counting, the reference for [`coverage`].
fn brute_force_coverage(ds: &Dataset, g1: &[usize], g2: &[usize]) -> Vec<f64> {
    let c1 = flat_group_centroid(ds, g1);
    let c2 = flat_group_centroid(ds, g2);
    let nc = ds.n_classes();
    let mut out = vec![0.0; nc];
    for &class in g1 {
        let mut hits = 0usize;
        for i in 0..ds.n_samples() {
            if ds.labels()[i] == class && flat_distance(ds, i, &c1) <= flat_distance(ds, i, &c2) {
                hits += 1;
            }
        }
        out[class] = hits as f64 / ds.class_counts()[class] as f64;
    }
    for &class in g2 {
        let mut hits = 0usize;
        for i in 0..ds.n_samples() {
            if ds.labels()[i] == class && flat_distance(ds, i, &c1) > flat_distance(ds, i, &c2) {
                hits += 1;
            }
        }
        out[class] = -(hits as f64 / ds.class_counts()[class] as f64);
    }
    out
}

/// Coverage equals the brute-force count on `sets` random synthetic
/// datasets with random bipartitions; exact comparison.
pub fn check_coverage_counting(seed: u64, sets: usize) -> Result<OracleOutcome> {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for index in 0..sets {
        let ds = synthetic_dataset(seed, index as u64);
        let mut rng = seeded_rng(seed, &[ROLE_ORACLE, 1000 + index as u64]);
        let nc = ds.n_classes();
        // random nonempty proper subset as g1
        let mask = rng.random_range(1..(1u32 << nc) - 1);
        let g1: Vec<usize> = (0..nc).filter(|&c| mask & (1 << c) != 0).collect();
        let g2: Vec<usize> = (0..nc).filter(|&c| mask & (1 << c) == 0).collect();
        let part = ClassPartition {
            g1: g1.clone(),
            g2: g2.clone(),
            score: partition_score(&ds, &g1, &g2, crate::partition::DEFAULT_EPS)?,
            centroid1: crate::partition::group_centroid(&ds, &g1)?,
            centroid2: crate::partition::group_centroid(&ds, &g2)?,
        };
        let produced = coverage(&ds, &part)?;
        let expected = brute_force_coverage(&ds, &g1, &g2);
        for (a, b) in produced.iter().zip(expected.iter()) {
            checked += 1;
            if a != b {
                mismatches += 1;
            }
        }
    }
    Ok(OracleOutcome::new(
        "coverage vs brute-force nearest-centroid counts",
        mismatches == 0,
        true,
        format!("{checked} values over {sets} synthetic datasets, {mismatches} mismatches"),
    ))
}

/// The search result admits no improving single-class move; exact up to the
/// acceptance tolerance.
pub fn check_sffs_local_optimum(name: &str, ds: &Dataset, eps: f64) -> Result<OracleOutcome> {
    let classes: Vec<usize> = (0..ds.n_classes()).collect();
    let p = sffs_bipartition(ds, &classes, eps)?;
    let tol = 1e-12 * p.score.abs().max(1.0);
    let mut violations = 0usize;
    let mut moves = 0usize;
    if p.g1.len() >= 2 {
        for &c in &p.g1 {
            let g1: Vec<usize> = p.g1.iter().copied().filter(|&x| x != c).collect();
            let mut g2 = p.g2.clone();
            g2.push(c);
            g2.sort_unstable();
            moves += 1;
            if partition_score(ds, &g1, &g2, eps)? > p.score + tol {
                violations += 1;
            }
        }
    }
    if p.g2.len() >= 2 {
        for &c in &p.g2 {
            let g2: Vec<usize> = p.g2.iter().copied().filter(|&x| x != c).collect();
            let mut g1 = p.g1.clone();
            g1.push(c);
            g1.sort_unstable();
            moves += 1;
            if partition_score(ds, &g1, &g2, eps)? > p.score + tol {
                violations += 1;
            }
        }
    }
    Ok(OracleOutcome::new(
        format!("{name}: search result is a single-move local optimum"),
        violations == 0,
        true,
        format!("{moves} single-class moves tested, {violations} improved the score"),
    ))
}

/// Score ratio of the search against exhaustive enumeration. Reported when
/// at least 0.80 (the hard floor), flagged for attention below 0.95.
pub fn check_sffs_vs_exhaustive(name: &str, ds: &Dataset, eps: f64) -> Result<OracleOutcome> {
    let classes: Vec<usize> = (0..ds.n_classes()).collect();
    let s = sffs_bipartition(ds, &classes, eps)?;
    let e = exhaustive_bipartition(ds, &classes, eps)?;
    let ratio = if e.score == 0.0 { 1.0 } else { s.score / e.score };
    let passed = ratio >= 0.80;
    let marker = if ratio >= 0.95 {
        "ok"
    } else if passed {
        "gap reported (below 0.95)"
    } else {
        "below hard floor 0.80"
    };
    Ok(OracleOutcome::new(
        format!("{name}: search score vs exhaustive optimum"),
        passed,
        true,
        format!(
            "search {:.6} / exhaustive {:.6} = {ratio:.4} ({marker})",
            s.score, e.score
        ),
    ))
}

/// Metrics match an independent confusion-matrix recomputation to 1e-12 on
/// `pairs` random label/prediction pairs.
pub fn check_metrics_confusion(seed: u64, pairs: usize) -> Result<OracleOutcome> {
    let mut rng = seeded_rng(seed, &[ROLE_ORACLE, 0xC0]);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let nc = rng.random_range(2..=6usize);
        let m = rng.random_range(1..=50usize);
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..nc)).collect();
        let preds: Vec<usize> = (0..m).map(|_| rng.random_range(0..nc)).collect();
        let produced = metrics(&labels, &preds, nc, 1.0)?;

        // reference: build the full confusion matrix first
        let mut confusion = vec![vec![0usize; nc]; nc];
        for (&t, &p) in labels.iter().zip(preds.iter()) {
            confusion[t][p] += 1;
        }
        let mut acc = 0.0;
        let mut prec = 0.0;
        let mut rec = 0.0;
        let mut fs = 0.0;
        for i in 0..nc {
            let tp = confusion[i][i];
            let fp: usize = (0..nc).filter(|&t| t != i).map(|t| confusion[t][i]).sum();
            let fn_: usize = (0..nc).filter(|&p| p != i).map(|p| confusion[i][p]).sum();
            let tn = m - tp - fp - fn_;
            acc += (tp + tn) as f64 / m as f64;
            let p = if tp + fp == 0 {
                0.0
            } else {
                tp as f64 / (tp + fp) as f64
            };
            let r = if tp + fn_ == 0 {
                0.0
            } else {
                tp as f64 / (tp + fn_) as f64
            };
            prec += p;
            rec += r;
            fs += if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        }
        let ncf = nc as f64;
        for (a, b) in [
            (produced.accuracy, acc / ncf),
            (produced.precision, prec / ncf),
            (produced.recall, rec / ncf),
            (produced.fscore, fs / ncf),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(OracleOutcome::new(
        "metrics vs confusion-matrix recomputation",
        worst <= 1e-12,
        true,
        format!("{pairs} random pairs, max deviation {worst:.3e}"),
    ))
}

/// Structural claims for the soft matrix built on `ds`: column count,
/// entry range, integral coverage magnitudes, sign pattern against the
/// recorded splits, and entry-level agreement with the brute-force counts.
pub fn check_matrix_structure(name: &str, ds: &Dataset, eps: f64) -> Result<OracleOutcome> {
    let m = build_csecoc(ds, eps)?;
    let mut problems = Vec::new();
    if m.n_columns() != ds.n_classes() - 1 {
        problems.push(format!(
            "expected {} columns, found {}",
            ds.n_classes() - 1,
            m.n_columns()
        ));
    }
    let report = validate_matrix(&m);
    if !report.is_valid() {
        problems.push(format!("validity violations: {:?}", report.violations));
    }
    for l in 0..m.n_columns() {
        for r in 0..m.n_classes() {
            let v = m.value(r, l);
            if !(-1.0..=1.0).contains(&v) {
                problems.push(format!("entry ({r},{l}) = {v} out of range"));
            }
            let n = ds.class_counts()[r] as f64;
            let count = (v.abs() * n).round();
            if count / n != v.abs() {
                problems.push(format!("entry ({r},{l}) = {v} is not a count / N"));
            }
        }
        if let Some(meta) = &m.column_meta()[l] {
            let expected = brute_force_coverage(ds, &meta.g1, &meta.g2);
            for r in 0..m.n_classes() {
                if m.value(r, l) != expected[r] {
                    problems.push(format!(
                        "entry ({r},{l}) = {} but brute-force count gives {}",
                        m.value(r, l),
                        expected[r]
                    ));
                }
            }
        } else {
            problems.push(format!("column {l} lacks a split record"));
        }
    }
    Ok(OracleOutcome::new(
        format!("{name}: soft matrix structure"),
        problems.is_empty(),
        true,
        if problems.is_empty() {
            format!("{} columns checked", m.n_columns())
        } else {
            problems.join("; ")
        },
    ))
}

/// The full suite over the given datasets, plus synthetic-data checks.
pub fn run_oracle_suite(
    datasets: &[(String, Dataset)],
    seed: u64,
    eps: f64,
) -> Result<Vec<OracleOutcome>> {
    let mut outcomes = vec![
        check_coverage_counting(seed, 50)?,
        check_metrics_confusion(seed, 100)?,
    ];
    for index in 0..10u64 {
        let ds = synthetic_dataset(seed, 5000 + index);
        outcomes.push(check_sffs_local_optimum(
            &format!("synthetic-{index}"),
            &ds,
            eps,
        )?);
    }
    for (name, ds) in datasets {
        if ds.n_classes() > 12 {
            outcomes.push(OracleOutcome::new(
                format!("{name}: skipped"),
                false,
                true,
                "dataset too large for exhaustive enumeration (> 12 classes)".into(),
            ));
            continue;
        }
        outcomes.push(check_sffs_local_optimum(name, ds, eps)?);
        outcomes.push(check_sffs_vs_exhaustive(name, ds, eps)?);
        outcomes.push(check_matrix_structure(name, ds, eps)?);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{iris, point_classes};

    #[test]
    fn coverage_counting_matches_on_synthetic_data() {
        let outcome = check_coverage_counting(42, 50).unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn metrics_confusion_matches() {
        let outcome = check_metrics_confusion(42, 100).unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }

    #[test]
    fn sffs_checks_pass_on_iris() {
        let ds = iris();
        let eps = crate::partition::DEFAULT_EPS;
        assert!(check_sffs_local_optimum("iris", &ds, eps).unwrap().passed);
        let vs = check_sffs_vs_exhaustive("iris", &ds, eps).unwrap();
        assert!(vs.passed, "{}", vs.detail);
        assert!(check_matrix_structure("iris", &ds, eps).unwrap().passed);
    }

    #[test]
    fn sffs_equals_exhaustive_on_four_cluster_line() {
        let ds = point_classes(&[0.0, 1.0, 10.0, 11.0], 3);
        let out = check_sffs_vs_exhaustive("line", &ds, crate::partition::DEFAULT_EPS).unwrap();
        assert!(out.passed);
        assert!(out.detail.contains("1.0000"), "{}", out.detail);
    }

    #[test]
    fn synthetic_datasets_are_deterministic() {
        let a = synthetic_dataset(9, 3);
        let b = synthetic_dataset(9, 3);
        assert_eq!(a.features(), b.features());
        assert_eq!(a.labels(), b.labels());
    }
}
