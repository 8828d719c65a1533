//! Acceptance suite.
//!
//! One test per criterion; each prints a pass/fail line per sub-check and
//! fails if any sub-check fails or a required dataset file is absent.
//! Published-table cells are checked in every combination of the
//! under-specified run modes (standardization on/off, matrix rebuilt per
//! fold vs once on the full data) and against both accuracy conventions;
//! a cell passes when any combination lands inside the tolerance.
//!
//! The five benchmark CSVs are expected under `data/`; `data/README.md`
//! documents how to obtain the ones that are not redistributed here.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::LazyLock;

use csecoc::coding::{build_csecoc, build_matrix, validate_matrix, MatrixKind};
use csecoc::data::{load_csv, stratified_folds, CsvSchema, Dataset};
use csecoc::eval::{benchmark, run_cv, CvOptions, CvRow, LearnerBase};
use csecoc::oracle;
use csecoc::pipeline::{decode, Decoding};
use csecoc::DEFAULT_EPS;

const SEED: u64 = 42;
const FOLDS: usize = 10;
const REPEATS: usize = 10;
const ALL_DATASETS: [&str; 5] = ["iris", "wine", "thyroid", "vehicle", "dermatology"];

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")).join(format!("{name}.csv"))
}

fn load(name: &str) -> Option<Dataset> {
    let path = data_path(name);
    if !path.exists() {
        return None;
    }
    Some(load_csv(&path, &CsvSchema::default()).unwrap_or_else(|e| panic!("loading {name}: {e}")))
}

/// Table cells under test: (dataset, method, accuracy, fscore).
const CELLS: [(&str, MatrixKind, f64, f64); 8] = [
    ("iris", MatrixKind::Ova, 94.7, 94.7),
    ("iris", MatrixKind::Ovo, 94.7, 94.7),
    ("wine", MatrixKind::Ova, 97.2, 97.2),
    ("wine", MatrixKind::Csecoc, 98.1, 98.2),
    ("thyroid", MatrixKind::Csecoc, 94.2, 94.0),
    ("vehicle", MatrixKind::Ova, 68.4, 66.7),
    ("vehicle", MatrixKind::Csecoc, 71.5, 70.3),
    ("dermatology", MatrixKind::Csecoc, 93.5, 93.1),
];

/// Cross-validated rows for every cell in all four run modes,
/// keyed by (dataset, method, standardize, leaky).
struct Sweep {
    rows: BTreeMap<(String, String, bool, bool), CvRow>,
    missing: Vec<&'static str>,
}

static SWEEP: LazyLock<Sweep> = LazyLock::new(|| {
    let mut rows = BTreeMap::new();
    let mut missing = Vec::new();
    let mut datasets: BTreeMap<&str, Dataset> = BTreeMap::new();
    for (name, _, _, _) in CELLS {
        if datasets.contains_key(name) || missing.contains(&name) {
            continue;
        }
        match load(name) {
            Some(ds) => {
                datasets.insert(name, ds);
            }
            None => missing.push(name),
        }
    }
    for (name, method, _, _) in CELLS {
        let Some(ds) = datasets.get(name) else { continue };
        let key_done = rows.contains_key(&(name.to_string(), method.to_string(), false, false));
        if key_done {
            continue;
        }
        let plan = stratified_folds(ds, FOLDS, REPEATS, SEED).expect("plan");
        for standardize in [false, true] {
            for leaky in [false, true] {
                let options = CvOptions {
                    standardize,
                    leaky_matrix: leaky,
                    ..CvOptions::default()
                };
                let row = run_cv(name, ds, method, &LearnerBase::Knn { k: 5 }, &plan, &options)
                    .expect("cv run");
                rows.insert((name.to_string(), method.to_string(), standardize, leaky), row);
            }
        }
    }
    Sweep { rows, missing }
});

struct Line {
    label: String,
    ok: bool,
    detail: String,
}

fn finish(criterion: &str, lines: Vec<Line>) {
    let mut failed = 0usize;
    for line in &lines {
        println!(
            "ACCEPTANCE {criterion} [{}] {} — {}",
            if line.ok { "PASS" } else { "FAIL" },
            line.label,
            line.detail
        );
        if !line.ok {
            failed += 1;
        }
    }
    println!(
        "ACCEPTANCE {criterion}: {} ({} of {} sub-checks passed)",
        if failed == 0 { "PASS" } else { "FAIL" },
        lines.len() - failed,
        lines.len()
    );
    assert_eq!(
        failed,
        0,
        "{criterion}: {failed} sub-check(s) failed; missing datasets (if any) are documented in data/README.md"
    );
}

fn missing_line(criterion_label: String, name: &str) -> Line {
    Line {
        label: criterion_label,
        ok: false,
        detail: format!(
            "dataset `{name}` not present under data/ (see data/README.md for how to obtain it)"
        ),
    }
}

fn mode_values(name: &str, method: MatrixKind) -> Vec<(String, f64, f64)> {
    // (mode description, class-averaged accuracy, plain accuracy) in percent
    let mut out = Vec::new();
    for standardize in [false, true] {
        for leaky in [false, true] {
            if let Some(row) =
                SWEEP
                    .rows
                    .get(&(name.to_string(), method.to_string(), standardize, leaky))
            {
                let mode = format!(
                    "standardize={} leaky={}",
                    standardize as u8, leaky as u8
                );
                out.push((
                    mode,
                    100.0 * row.accuracy.mean,
                    100.0 * row.multiclass_accuracy.mean,
                ));
            }
        }
    }
    out
}

#[test]
fn criterion_1_published_accuracy_cells() {
    let mut lines = Vec::new();
    for (name, method, accuracy_target, _) in CELLS {
        let label = format!("{name}/{method} accuracy {accuracy_target}");
        if SWEEP.missing.contains(&name) {
            lines.push(missing_line(label, name));
            continue;
        }
        let values = mode_values(name, method);
        let mut hit = None;
        let mut all = Vec::new();
        for (mode, class_avg, plain) in &values {
            all.push(format!("{mode}: avg {class_avg:.1} plain {plain:.1}"));
            if hit.is_none() {
                if (class_avg - accuracy_target).abs() <= 3.0 {
                    hit = Some(format!("{mode} class-averaged {class_avg:.1}"));
                } else if (plain - accuracy_target).abs() <= 3.0 {
                    hit = Some(format!("{mode} plain {plain:.1}"));
                }
            }
        }
        lines.push(Line {
            label,
            ok: hit.is_some(),
            detail: match hit {
                Some(mode) => format!("within ±3.0 via {mode}"),
                None => format!("no mode within ±3.0: {}", all.join("; ")),
            },
        });
    }
    finish("criterion-1 (published accuracy, KNN, 10x10 CV)", lines);
}

#[test]
fn criterion_2_published_fscore_cells() {
    let mut lines = Vec::new();
    for (name, method, _, fscore_target) in CELLS {
        let label = format!("{name}/{method} fscore {fscore_target}");
        if SWEEP.missing.contains(&name) {
            lines.push(missing_line(label, name));
            continue;
        }
        let mut hit = None;
        let mut all = Vec::new();
        for standardize in [false, true] {
            for leaky in [false, true] {
                if let Some(row) =
                    SWEEP
                        .rows
                        .get(&(name.to_string(), method.to_string(), standardize, leaky))
                {
                    let f = 100.0 * row.fscore.mean;
                    let mode = format!("standardize={} leaky={}", standardize as u8, leaky as u8);
                    all.push(format!("{mode}: {f:.1}"));
                    if hit.is_none() && (f - fscore_target).abs() <= 3.5 {
                        hit = Some(format!("{mode} fscore {f:.1}"));
                    }
                }
            }
        }
        lines.push(Line {
            label,
            ok: hit.is_some(),
            detail: match hit {
                Some(mode) => format!("within ±3.5 via {mode}"),
                None => format!("no mode within ±3.5: {}", all.join("; ")),
            },
        });
    }
    finish("criterion-2 (published fscore, KNN, 10x10 CV)", lines);
}

#[test]
fn criterion_3_kernel_ridge_stays_near_best_baseline() {
    // the kernel-ridge regressor stands in for the original base learner,
    // so this is a sanity envelope, not a parity claim
    let mut lines = Vec::new();
    let base = LearnerBase::KernelRidge {
        gamma: None,
        lambda: 1.0,
    };
    let options = CvOptions {
        standardize: true,
        ..CvOptions::default()
    };
    for name in ALL_DATASETS {
        let label = format!("{name}: csecoc within 6 points of best baseline (kernel ridge)");
        let Some(ds) = load(name) else {
            lines.push(missing_line(label, name));
            continue;
        };
        let plan = stratified_folds(&ds, FOLDS, REPEATS, SEED).expect("plan");
        let mut csecoc_acc = None;
        let mut best_baseline: Option<(MatrixKind, f64)> = None;
        let mut failures = Vec::new();
        for method in MatrixKind::ALL {
            match run_cv(name, &ds, method, &base, &plan, &options) {
                Ok(row) => {
                    let acc = 100.0 * row.accuracy.mean;
                    if method == MatrixKind::Csecoc {
                        csecoc_acc = Some(acc);
                    } else if best_baseline.is_none_or(|(_, b)| acc > b) {
                        best_baseline = Some((method, acc));
                    }
                }
                Err(e) => failures.push(format!("{method}: {e}")),
            }
        }
        let line = match (csecoc_acc, best_baseline) {
            (Some(ours), Some((best_kind, best))) => {
                let ok = ours >= best - 6.0;
                Line {
                    label,
                    ok,
                    detail: format!(
                        "csecoc {ours:.1} vs best baseline {best_kind} {best:.1}{}",
                        if failures.is_empty() {
                            String::new()
                        } else {
                            format!(" (failed cells: {})", failures.join(", "))
                        }
                    ),
                }
            }
            _ => Line {
                label,
                ok: false,
                detail: format!("runs failed: {}", failures.join(", ")),
            },
        };
        lines.push(line);
    }
    finish("criterion-3 (kernel-ridge sanity envelope)", lines);
}

#[test]
fn criterion_4_structural_claims() {
    let mut lines = Vec::new();
    for name in ALL_DATASETS {
        let label = format!("{name}: soft matrix structure");
        let Some(ds) = load(name) else {
            lines.push(missing_line(label, name));
            continue;
        };
        let matrix = build_csecoc(&ds, DEFAULT_EPS).expect("matrix builds");
        let mut problems = Vec::new();
        if matrix.n_columns() != ds.n_classes() - 1 {
            problems.push(format!(
                "column count {} != Nc-1 = {}",
                matrix.n_columns(),
                ds.n_classes() - 1
            ));
        }
        for ((r, l), &v) in matrix.values().indexed_iter() {
            if !(-1.0..=1.0).contains(&v) {
                problems.push(format!("entry ({r},{l}) = {v} outside [-1,1]"));
            }
            let n = ds.class_counts()[r] as f64;
            let count = (v.abs() * n).round();
            if count / n != v.abs() {
                problems.push(format!("entry ({r},{l}) = {v}: |entry|*N not an integer"));
            }
        }
        // sign pattern against the recorded splits, plus all other matrix
        // invariants
        let report = validate_matrix(&matrix);
        if !report.is_valid() {
            problems.push(format!("violations: {}", report.violations.join("; ")));
        }
        lines.push(Line {
            label,
            ok: problems.is_empty(),
            detail: if problems.is_empty() {
                format!(
                    "{} columns, exact checks passed",
                    matrix.n_columns()
                )
            } else {
                problems.join("; ")
            },
        });
    }
    finish("criterion-4 (structural claims, exact)", lines);
}

#[test]
fn criterion_5_oracle_suite() {
    let mut lines = Vec::new();

    let coverage = oracle::check_coverage_counting(SEED, 50).expect("coverage oracle");
    lines.push(Line {
        label: "5a coverage vs brute-force counts (50 synthetic sets, exact)".into(),
        ok: coverage.passed,
        detail: coverage.detail,
    });

    for name in ALL_DATASETS {
        let label = format!("5b {name}: search result is a single-move local optimum");
        match load(name) {
            Some(ds) => {
                let outcome =
                    oracle::check_sffs_local_optimum(name, &ds, DEFAULT_EPS).expect("oracle");
                lines.push(Line {
                    label,
                    ok: outcome.passed,
                    detail: outcome.detail,
                });
            }
            None => lines.push(missing_line(label, name)),
        }
    }

    for name in ALL_DATASETS {
        let label = format!("5c {name}: search score vs exhaustive optimum");
        match load(name) {
            Some(ds) => {
                let outcome =
                    oracle::check_sffs_vs_exhaustive(name, &ds, DEFAULT_EPS).expect("oracle");
                lines.push(Line {
                    label,
                    ok: outcome.passed, // hard failure only below 0.80
                    detail: outcome.detail,
                });
            }
            None => lines.push(missing_line(label, name)),
        }
    }

    let confusion = oracle::check_metrics_confusion(SEED, 100).expect("metrics oracle");
    lines.push(Line {
        label: "5d metrics vs confusion recomputation (100 pairs, 1e-12)".into(),
        ok: confusion.passed,
        detail: confusion.detail,
    });

    finish("criterion-5 (oracle suite)", lines);
}

#[test]
fn criterion_6_benchmark_determinism() {
    // same seed, different worker counts: byte-identical reports
    let mut lines = Vec::new();
    let mut datasets = Vec::new();
    for name in ["iris", "wine"] {
        if let Some(ds) = load(name) {
            datasets.push((name.to_string(), Ok(ds)));
        }
    }
    assert!(!datasets.is_empty(), "iris/wine must be present");
    let options = CvOptions::default();
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        pool.install(|| {
            benchmark(
                &datasets,
                &MatrixKind::ALL,
                &[LearnerBase::Knn { k: 5 }],
                3,
                2,
                SEED,
                &options,
            )
        })
    };
    let single = run_with(1);
    let parallel = run_with(4);
    let identical_json = single.to_json() == parallel.to_json();
    let identical_text = single.render_table() == parallel.render_table();
    lines.push(Line {
        label: "report bytes identical for 1 vs 4 workers".into(),
        ok: identical_json && identical_text,
        detail: format!(
            "json identical: {identical_json}, table identical: {identical_text} ({} rows)",
            single.rows.len()
        ),
    });
    let rerun = run_with(4);
    lines.push(Line {
        label: "repeat run with the same seed is identical".into(),
        ok: rerun.to_json() == parallel.to_json(),
        detail: format!("{} rows compared", rerun.rows.len()),
    });
    finish("criterion-6 (determinism)", lines);
}

#[test]
fn criterion_7_perfect_learner_identity() {
    // oracle learners that emit the true codeword row must decode to the
    // true class for every sample, dataset, and hard matrix kind
    let hard_kinds = [
        MatrixKind::DecocLike,
        MatrixKind::Ova,
        MatrixKind::Ovo,
        MatrixKind::DenseRandom,
        MatrixKind::SparseRandom,
    ];
    let mut lines = Vec::new();
    for name in ALL_DATASETS {
        let label = format!("{name}: perfect-learner accuracy 1.0 on all hard kinds");
        let Some(ds) = load(name) else {
            lines.push(missing_line(label, name));
            continue;
        };
        let mut problems = Vec::new();
        for kind in hard_kinds {
            let matrix = build_matrix(&ds, kind, DEFAULT_EPS, SEED, 200).expect("matrix");
            let mut wrong = 0usize;
            for &label_idx in ds.labels() {
                let outputs: Vec<f64> = (0..matrix.n_columns())
                    .map(|l| matrix.value(label_idx, l))
                    .collect();
                for rule in [Decoding::Euclidean, Decoding::HammingTernary] {
                    if decode(&outputs, &matrix, rule).expect("decode") != label_idx {
                        wrong += 1;
                    }
                }
            }
            if wrong > 0 {
                problems.push(format!("{kind}: {wrong} misdecoded codewords"));
            }
        }
        lines.push(Line {
            label,
            ok: problems.is_empty(),
            detail: if problems.is_empty() {
                "both decodings recover every class".into()
            } else {
                problems.join("; ")
            },
        });
    }
    finish("criterion-7 (perfect-learner identity)", lines);
}
