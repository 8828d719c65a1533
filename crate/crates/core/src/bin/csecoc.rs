//! Command-line front end: encode, train, predict, benchmark, oracle-check.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.
//! Benchmark cell failures are reported inside the run and do not fail the
//! process. Flags override config-file values; `--config` points at an
//! optional `key=value` file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csecoc::coding::{
    build_matrix, read_matrix_csv, validate_matrix, validate_values, MatrixKind,
};
use csecoc::config::RunConfig;
use csecoc::data::{load_csv, Dataset};
use csecoc::eval::{benchmark, CvOptions, LearnerBase, NamedDataset};
use csecoc::learners::LearnerSpec;
use csecoc::oracle::{run_oracle_suite, OracleOutcome};
use csecoc::pipeline::{
    fit_pipeline, load_model, save_model, Decoding, PipelineOptions, Standardizer,
};

/// The five benchmark datasets expected under the data directory.
const STANDARD_DATASETS: [&str; 5] = ["dermatology", "wine", "iris", "thyroid", "vehicle"];

#[derive(Parser)]
#[command(name = "csecoc", version, about = "Soft-coded ECOC multiclass toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coding matrix from a dataset and write it as CSV.
    Encode(EncodeArgs),
    /// Train an ensemble and persist it.
    Train(TrainArgs),
    /// Predict classes for a dataset with a persisted model.
    Predict(PredictArgs),
    /// Repeated stratified cross-validation over datasets x methods.
    Benchmark(BenchmarkArgs),
    /// Run the brute-force reference checks.
    #[command(name = "oracle-check")]
    OracleCheck(OracleArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Optional key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Denominator clamp for the partition criterion.
    #[arg(long)]
    eps: Option<f64>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dataset CSV path.
    #[arg(long)]
    dataset: Option<String>,
    /// Matrix kind: csecoc, decoc_like, ova, ovo, dense_random, sparse_random.
    #[arg(long)]
    method: Option<String>,
    /// Standardize features before building the matrix.
    #[arg(long)]
    standardize: bool,
    /// Output CSV path (default: <dataset stem>_<method>_matrix.csv).
    #[arg(long)]
    matrix_out: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// knn, kernel, knn_regressor, knn_classifier, or kernel_ridge.
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    ridge_lambda: Option<f64>,
    #[arg(long)]
    standardize: bool,
    /// Output directory for model.json, matrix.csv, manifest.json.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Directory written by `train`.
    #[arg(long)]
    model: Option<String>,
    /// Dataset CSV (same schema as training; labels are used only to report
    /// accuracy when they match the model's classes).
    #[arg(long)]
    dataset: Option<String>,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Single dataset CSV path.
    #[arg(long)]
    dataset: Option<String>,
    /// Comma list of CSV paths or names under the data dir, or `all`.
    #[arg(long)]
    datasets: Option<String>,
    /// Single method name.
    #[arg(long)]
    method: Option<String>,
    /// Comma list of methods, or `all`.
    #[arg(long)]
    methods: Option<String>,
    /// knn, kernel, or all.
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    ridge_lambda: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    standardize: bool,
    /// Build each coding matrix once from the full data (leaks test
    /// information; for comparison runs only).
    #[arg(long)]
    leaky_matrix: bool,
    /// Report directory (default `reports`).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dataset CSV to include in the checks (needs <= 12 classes).
    #[arg(long)]
    dataset: Option<String>,
    /// Comma list of dataset CSV paths to include.
    #[arg(long)]
    datasets: Option<String>,
    /// Matrix CSV whose validity should be checked.
    #[arg(long)]
    matrix_in: Option<String>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<csecoc::Error> for CliError {
    fn from(e: csecoc::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = common.eps {
        cfg.eps = eps;
    }
    if let Some(workers) = common.workers {
        cfg.workers = workers;
    }
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    }
    Ok(cfg)
}

fn require<'a>(value: &'a Option<String>, fallback: &'a Option<String>, what: &str) -> Result<&'a str, CliError> {
    value
        .as_deref()
        .or(fallback.as_deref())
        .ok_or_else(|| CliError::config(format!("missing required --{what}")))
}

fn parse_method(name: &str) -> Result<MatrixKind, CliError> {
    name.parse::<MatrixKind>()
        .map_err(|e| CliError::config(e.to_string()))
}

fn load_dataset(path: &str, cfg: &RunConfig) -> Result<Dataset, CliError> {
    load_csv(path, &cfg.csv_schema()).map_err(|e| CliError::runtime(e.to_string()))
}

fn matrix_notes(matrix: &csecoc::coding::CodingMatrix) -> String {
    let mut out = format!("kind: {}\n", matrix.kind());
    let names = matrix.class_names();
    for (l, meta) in matrix.column_meta().iter().enumerate() {
        match meta {
            Some(meta) => {
                let list = |g: &[usize]| {
                    g.iter()
                        .map(|&c| names[c].as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                out.push_str(&format!(
                    "H{l}: g1 = [{}], g2 = [{}], score = {:.9}\n",
                    list(&meta.g1),
                    list(&meta.g2),
                    meta.score
                ));
            }
            None => out.push_str(&format!("H{l}: fixed construction ({})\n", matrix.kind())),
        }
    }
    out
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    let dataset_path = require(&args.dataset, &cfg.dataset, "dataset")?.to_string();
    let method = parse_method(require(&args.method, &cfg.method, "method")?)?;
    let ds = load_dataset(&dataset_path, &cfg)?;
    let ds = if args.standardize || cfg.standardize {
        let std = Standardizer::fit(ds.features());
        ds.with_features(std.transform(ds.features()))
            .map_err(|e| CliError::runtime(e.to_string()))?
    } else {
        ds
    };
    let matrix = build_matrix(&ds, method, cfg.eps, cfg.seed, cfg.candidates)?;
    let out = args
        .matrix_out
        .or(cfg.matrix_out)
        .unwrap_or_else(|| {
            let stem = Path::new(&dataset_path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into());
            format!("{stem}_{method}_matrix.csv")
        });
    matrix.write_csv(&out)?;
    let notes_path = format!("{out}.notes.txt");
    std::fs::write(&notes_path, matrix_notes(&matrix)).map_err(|e| {
        CliError::runtime(format!("writing {notes_path}: {e}"))
    })?;
    let report = validate_matrix(&matrix);
    if !report.is_valid() {
        return Err(CliError::runtime(format!(
            "built matrix failed validation:\n{report}"
        )));
    }
    println!(
        "{}x{} {} matrix -> {out} (notes: {notes_path})",
        matrix.n_classes(),
        matrix.n_columns(),
        method
    );
    Ok(())
}

/// Maps a learner name to spec and decoding for one matrix kind.
fn resolve_learner(
    name: &str,
    kind: MatrixKind,
    cfg: &RunConfig,
) -> Result<(LearnerSpec, Decoding), CliError> {
    match name {
        "knn" => Ok(LearnerBase::Knn { k: cfg.knn_k }.paired_spec(kind)),
        "kernel" | "kernel_ridge" => Ok(LearnerBase::KernelRidge {
            gamma: cfg.gamma,
            lambda: cfg.ridge_lambda,
        }
        .paired_spec(kind)),
        "knn_regressor" => Ok((LearnerSpec::knn_regressor(cfg.knn_k), Decoding::Euclidean)),
        "knn_classifier" => {
            let decoding = if kind == MatrixKind::Csecoc {
                Decoding::Euclidean
            } else {
                Decoding::HammingTernary
            };
            Ok((LearnerSpec::knn_classifier(cfg.knn_k), decoding))
        }
        other => Err(CliError::config(format!(
            "unknown learner `{other}` (knn, kernel, knn_regressor, knn_classifier, kernel_ridge)"
        ))),
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    if let Some(k) = args.knn_k {
        cfg.knn_k = k;
    }
    if let Some(g) = args.gamma {
        cfg.gamma = Some(g);
    }
    if let Some(l) = args.ridge_lambda {
        cfg.ridge_lambda = l;
    }
    if args.standardize {
        cfg.standardize = true;
    }
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
    let dataset_path = require(&args.dataset, &cfg.dataset, "dataset")?.to_string();
    let method = parse_method(require(&args.method, &cfg.method, "method")?)?;
    let learner_name = args
        .learner
        .unwrap_or_else(|| cfg.learner.clone());
    let (spec, decoding) = resolve_learner(&learner_name, method, &cfg)?;
    let ds = load_dataset(&dataset_path, &cfg)?;
    let options = PipelineOptions {
        standardize: cfg.standardize,
        hard_targets: cfg.hard_targets,
    };
    let model = fit_pipeline(
        &ds,
        method,
        &spec,
        decoding,
        &options,
        cfg.eps,
        cfg.seed,
        cfg.candidates,
    )?;
    let out_dir = PathBuf::from(args.out.or(cfg.out).unwrap_or_else(|| "model".into()));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::runtime(format!("creating {}: {e}", out_dir.display()))
    })?;
    model.matrix().write_csv(out_dir.join("matrix.csv"))?;
    save_model(&model, out_dir.join("model.json"))?;
    let manifest = serde_json::json!({
        "format_version": csecoc::pipeline::MODEL_FORMAT_VERSION,
        "dataset": dataset_path,
        "method": method.to_string(),
        "learner": {
            "family": spec.family.to_string(),
            "k": spec.k,
            "gamma": spec.gamma,
            "ridge_lambda": spec.ridge_lambda,
        },
        "decoding": decoding.to_string(),
        "standardize": cfg.standardize,
        "hard_targets": cfg.hard_targets,
        "seed": cfg.seed,
        "eps": cfg.eps,
        "classes": model.matrix().class_names(),
        "ensemble_size": model.matrix().n_columns(),
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
    .map_err(|e| CliError::runtime(format!("writing manifest: {e}")))?;
    println!(
        "trained {} x {} ({} learners) -> {}",
        method,
        spec.family,
        model.matrix().n_columns(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    let model_dir = args
        .model
        .ok_or_else(|| CliError::config("missing required --model"))?;
    let dataset_path = require(&args.dataset, &cfg.dataset, "dataset")?.to_string();
    let model = load_model(Path::new(&model_dir).join("model.json"))?;
    let ds = load_dataset(&dataset_path, &cfg)?;
    let mut lines = String::new();
    let mut predictions = Vec::with_capacity(ds.n_samples());
    for i in 0..ds.n_samples() {
        let class = model.predict(ds.row(i))?;
        predictions.push(class);
        lines.push_str(model.matrix().class_names()[class].as_str());
        lines.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, &lines)
            .map_err(|e| CliError::runtime(format!("writing {path}: {e}")))?,
        None => print!("{lines}"),
    }
    // when the file's label set matches the model's classes, report accuracy
    let model_names = model.matrix().class_names();
    if ds.class_names().iter().all(|n| model_names.contains(n)) {
        let correct = (0..ds.n_samples())
            .filter(|&i| {
                model_names[predictions[i]] == ds.class_names()[ds.labels()[i]]
            })
            .count();
        eprintln!(
            "accuracy on labeled input: {:.4} ({correct}/{})",
            correct as f64 / ds.n_samples() as f64,
            ds.n_samples()
        );
    }
    Ok(())
}

fn dataset_list(args_dataset: &Option<String>, args_datasets: &Option<String>, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    if let Some(one) = args_dataset.clone().or(cfg.dataset.clone()) {
        return Ok(vec![one]);
    }
    let raw = args_datasets
        .clone()
        .or_else(|| {
            if cfg.datasets.is_empty() {
                None
            } else {
                Some(cfg.datasets.join(","))
            }
        })
        .ok_or_else(|| CliError::config("missing --dataset or --datasets"))?;
    if raw == "all" {
        return Ok(STANDARD_DATASETS
            .iter()
            .map(|name| format!("{}/{name}.csv", cfg.data_dir))
            .collect());
    }
    Ok(raw
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .map(|s| {
            if s.contains('/') || s.ends_with(".csv") {
                s
            } else {
                format!("{}/{s}.csv", cfg.data_dir)
            }
        })
        .collect())
}

fn method_list(args_method: &Option<String>, args_methods: &Option<String>, cfg: &RunConfig) -> Result<Vec<MatrixKind>, CliError> {
    if let Some(one) = args_method.clone().or(cfg.method.clone()) {
        return Ok(vec![parse_method(&one)?]);
    }
    let raw = args_methods
        .clone()
        .or_else(|| {
            if cfg.methods.is_empty() {
                None
            } else {
                Some(cfg.methods.join(","))
            }
        })
        .unwrap_or_else(|| "all".into());
    if raw == "all" {
        return Ok(MatrixKind::ALL.to_vec());
    }
    raw.split(',')
        .map(|s| parse_method(s.trim()))
        .collect()
}

fn stem_of(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    if let Some(k) = args.knn_k {
        cfg.knn_k = k;
    }
    if let Some(g) = args.gamma {
        cfg.gamma = Some(g);
    }
    if let Some(l) = args.ridge_lambda {
        cfg.ridge_lambda = l;
    }
    if let Some(f) = args.folds {
        cfg.folds = f;
    }
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if args.standardize {
        cfg.standardize = true;
    }
    if args.leaky_matrix {
        cfg.leaky_matrix = true;
    }
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;

    let paths = dataset_list(&args.dataset, &args.datasets, &cfg)?;
    let methods = method_list(&args.method, &args.methods, &cfg)?;
    let learner_name = args.learner.unwrap_or_else(|| cfg.learner.clone());
    let bases: Vec<LearnerBase> = match learner_name.as_str() {
        "knn" => vec![LearnerBase::Knn { k: cfg.knn_k }],
        "kernel" | "kernel_ridge" => vec![LearnerBase::KernelRidge {
            gamma: cfg.gamma,
            lambda: cfg.ridge_lambda,
        }],
        "all" => vec![
            LearnerBase::Knn { k: cfg.knn_k },
            LearnerBase::KernelRidge {
                gamma: cfg.gamma,
                lambda: cfg.ridge_lambda,
            },
        ],
        other => {
            return Err(CliError::config(format!(
                "benchmark learner must be knn, kernel or all, got `{other}`"
            )))
        }
    };

    let datasets: Vec<NamedDataset> = paths
        .iter()
        .map(|path| {
            (
                stem_of(path),
                load_csv(path, &cfg.csv_schema()).map_err(|e| e.to_string()),
            )
        })
        .collect();
    let options = CvOptions {
        standardize: cfg.standardize,
        leaky_matrix: cfg.leaky_matrix,
        hard_targets: cfg.hard_targets,
        eps: cfg.eps,
        candidates: cfg.candidates,
        beta: cfg.beta,
    };
    let mut report = benchmark(
        &datasets,
        &methods,
        &bases,
        cfg.folds,
        cfg.repeats,
        cfg.seed,
        &options,
    );
    // complete the effective configuration so a report reproduces itself
    report
        .metadata
        .decision_flags
        .insert("cli_dataset_paths".into(), paths.join(","));
    report.metadata.decision_flags.insert(
        "csv_schema".into(),
        format!(
            "label_column={:?} has_header={} missing_policy={:?}",
            cfg.label_column, cfg.has_header, cfg.missing_policy
        ),
    );
    let table = report.render_table();
    print!("{table}");
    let failed: Vec<&str> = report
        .rows
        .iter()
        .filter(|r| r.error.is_some())
        .map(|r| r.dataset.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!("{} cell(s) failed; see the report for details", failed.len());
    }
    let out_dir = PathBuf::from(args.out.or(cfg.out).unwrap_or_else(|| "reports".into()));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", out_dir.display())))?;
    let json_path = out_dir.join("report.json");
    let text_path = out_dir.join("report.txt");
    std::fs::write(&json_path, report.to_json())
        .map_err(|e| CliError::runtime(format!("writing report.json: {e}")))?;
    std::fs::write(&text_path, &table)
        .map_err(|e| CliError::runtime(format!("writing report.txt: {e}")))?;
    println!(
        "report -> {} and {}",
        json_path.display(),
        text_path.display()
    );
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    let mut datasets: Vec<(String, Dataset)> = Vec::new();
    let mut paths = Vec::new();
    if let Some(p) = &args.dataset {
        paths.push(p.clone());
    }
    if let Some(list) = &args.datasets {
        paths.extend(
            list.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty()),
        );
    }
    for path in &paths {
        let ds = load_dataset(path, &cfg)?;
        if ds.n_classes() > 12 {
            return Err(CliError::runtime(format!(
                "`{path}` has {} classes; exhaustive checks are limited to 12",
                ds.n_classes()
            )));
        }
        datasets.push((stem_of(path), ds));
    }
    let mut outcomes: Vec<OracleOutcome> =
        run_oracle_suite(&datasets, cfg.seed, cfg.eps).map_err(|e| CliError::runtime(e.to_string()))?;
    if let Some(matrix_path) = &args.matrix_in {
        let outcome = match read_matrix_csv(matrix_path) {
            Ok((_, values)) => {
                let report = validate_values(values.view());
                OracleOutcome {
                    name: format!("matrix file `{matrix_path}` validity"),
                    passed: report.is_valid(),
                    hard: true,
                    detail: if report.is_valid() {
                        format!("{} columns valid", values.ncols())
                    } else {
                        report.violations.join("; ")
                    },
                }
            }
            Err(e) => OracleOutcome {
                name: format!("matrix file `{matrix_path}` validity"),
                passed: false,
                hard: true,
                detail: e.to_string(),
            },
        };
        outcomes.push(outcome);
    }
    let mut hard_failures = 0usize;
    for outcome in &outcomes {
        let status = if outcome.passed {
            "PASS"
        } else if outcome.hard {
            hard_failures += 1;
            "FAIL"
        } else {
            "WARN"
        };
        println!("[{status}] {} — {}", outcome.name, outcome.detail);
    }
    if hard_failures > 0 {
        return Err(CliError::runtime(format!(
            "{hard_failures} hard oracle check(s) failed"
        )));
    }
    println!("all hard checks passed ({} total)", outcomes.len());
    Ok(())
}
