//! Run configuration: defaults, optional `key=value` config file, CLI
//! overrides.
//!
//! Flags win over config-file values, which win over the defaults below.
//! Unknown keys are rejected so typos cannot silently fall back to a
//! default. Every run echoes its full effective configuration into the
//! report metadata, so a report is reproducible from its own metadata.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::{CsvSchema, LabelColumn, MissingPolicy};
use crate::error::{Error, Result};

/// Effective settings for one CLI invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: Option<String>,
    pub datasets: Vec<String>,
    pub method: Option<String>,
    pub methods: Vec<String>,
    pub learner: String,
    pub knn_k: usize,
    pub gamma: Option<f64>,
    pub ridge_lambda: f64,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub eps: f64,
    pub standardize: bool,
    pub leaky_matrix: bool,
    pub hard_targets: bool,
    pub candidates: usize,
    pub beta: f64,
    pub workers: usize,
    pub out: Option<String>,
    pub matrix_out: Option<String>,
    pub data_dir: String,
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub missing_policy: MissingPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            datasets: Vec::new(),
            method: None,
            methods: Vec::new(),
            learner: "knn".into(),
            knn_k: 5,
            gamma: None,
            ridge_lambda: 1.0,
            folds: 10,
            repeats: 10,
            seed: 42,
            eps: crate::partition::DEFAULT_EPS,
            standardize: false,
            leaky_matrix: false,
            hard_targets: false,
            candidates: 1000,
            beta: 1.0,
            workers: 0,
            out: None,
            matrix_out: None,
            data_dir: "data".into(),
            label_column: LabelColumn::Last,
            has_header: true,
            missing_policy: MissingPolicy::DropRow,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidArgument(format!(
            "config key `{key}` wants a boolean, got `{value}`"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| {
        Error::InvalidArgument(format!("config key `{key}` has invalid value `{value}`"))
    })
}

impl RunConfig {
    /// Reads `key=value` lines (`#` starts a comment) into `self`,
    /// rejecting unknown keys.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut pairs = BTreeMap::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "config line {} is not key=value: `{line}`",
                    line_no + 1
                )));
            };
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in pairs {
            self.apply_pair(&key, &value)?;
        }
        Ok(())
    }

    fn apply_pair(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = Some(value.into()),
            "datasets" => self.datasets = split_list(value),
            "method" => self.method = Some(value.into()),
            "methods" => self.methods = split_list(value),
            "learner" => self.learner = value.into(),
            "knn_k" => self.knn_k = parse_num(key, value)?,
            "gamma" => self.gamma = Some(parse_num(key, value)?),
            "ridge_lambda" => self.ridge_lambda = parse_num(key, value)?,
            "folds" => self.folds = parse_num(key, value)?,
            "repeats" => self.repeats = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "standardize" => self.standardize = parse_bool(key, value)?,
            "leaky_matrix" => self.leaky_matrix = parse_bool(key, value)?,
            "hard_targets" => self.hard_targets = parse_bool(key, value)?,
            "candidates" => self.candidates = parse_num(key, value)?,
            "beta" => self.beta = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "out" => self.out = Some(value.into()),
            "matrix_out" => self.matrix_out = Some(value.into()),
            "data_dir" => self.data_dir = value.into(),
            "label_column" => {
                self.label_column = match value {
                    "first" => LabelColumn::First,
                    "last" => LabelColumn::Last,
                    idx => LabelColumn::Index(parse_num(key, idx)?),
                }
            }
            "has_header" => self.has_header = parse_bool(key, value)?,
            "missing_policy" => {
                self.missing_policy = match value {
                    "drop_row" => MissingPolicy::DropRow,
                    "mean_impute" => MissingPolicy::MeanImpute,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "missing_policy must be drop_row or mean_impute, got `{value}`"
                        )))
                    }
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Validates the numeric fields that every subcommand relies on.
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be >= 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::InvalidArgument("repeats must be >= 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("eps must be > 0".into()));
        }
        if self.candidates < 1 {
            return Err(Error::InvalidArgument("candidates must be >= 1".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidArgument("beta must be > 0".into()));
        }
        if self.knn_k < 1 {
            return Err(Error::InvalidArgument("knn_k must be >= 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::InvalidArgument("gamma must be > 0".into()));
            }
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::InvalidArgument("ridge_lambda must be >= 0".into()));
        }
        Ok(())
    }

    pub fn csv_schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column,
            has_header: self.has_header,
            missing_policy: self.missing_policy,
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
