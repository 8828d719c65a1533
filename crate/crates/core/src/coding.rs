//! Coding matrix construction and validation.
//!
//! A coding matrix has one row per class and one column per base learner,
//! entries in `[-1, 1]`. Tree kinds (`csecoc`, `decoc_like`) are built by
//! recursively splitting the class set with the bipartition search; `csecoc`
//! fills each column with signed per-class coverage values, `decoc_like`
//! with hard `±1`. Baseline kinds are the classic one-vs-all, one-vs-one and
//! best-of-N random ternary constructions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::{sffs_search, ClassPartition, PartitionCtx};
use crate::rng::{seeded_rng, ROLE_MATRIX};

/// Per-column redraw attempts inside one random-matrix candidate.
const COLUMN_RETRY: usize = 200;

/// Matrix construction scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Csecoc,
    DecocLike,
    Ova,
    Ovo,
    DenseRandom,
    SparseRandom,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 6] = [
        MatrixKind::Csecoc,
        MatrixKind::DecocLike,
        MatrixKind::Ova,
        MatrixKind::Ovo,
        MatrixKind::DenseRandom,
        MatrixKind::SparseRandom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Csecoc => "csecoc",
            MatrixKind::DecocLike => "decoc_like",
            MatrixKind::Ova => "ova",
            MatrixKind::Ovo => "ovo",
            MatrixKind::DenseRandom => "dense_random",
            MatrixKind::SparseRandom => "sparse_random",
        }
    }

    /// True for the kinds built by recursive class splitting.
    pub fn is_tree(&self) -> bool {
        matches!(self, MatrixKind::Csecoc | MatrixKind::DecocLike)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, MatrixKind::DenseRandom | MatrixKind::SparseRandom)
    }

    /// Columns this kind produces for `nc` classes.
    pub fn ensemble_size(&self, nc: usize) -> usize {
        match self {
            MatrixKind::Csecoc | MatrixKind::DecocLike => nc - 1,
            MatrixKind::Ova => nc,
            MatrixKind::Ovo => nc * (nc - 1) / 2,
            MatrixKind::DenseRandom => (10.0 * (nc as f64).log2()).ceil() as usize,
            MatrixKind::SparseRandom => (15.0 * (nc as f64).log2()).ceil() as usize,
        }
    }

    /// Stable discriminant folded into seed derivation paths.
    pub fn tag_for_seed(&self) -> u64 {
        match self {
            MatrixKind::Csecoc => 0,
            MatrixKind::DecocLike => 1,
            MatrixKind::Ova => 2,
            MatrixKind::Ovo => 3,
            MatrixKind::DenseRandom => 4,
            MatrixKind::SparseRandom => 5,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csecoc" => Ok(MatrixKind::Csecoc),
            "decoc_like" => Ok(MatrixKind::DecocLike),
            "ova" => Ok(MatrixKind::Ova),
            "ovo" => Ok(MatrixKind::Ovo),
            "dense_random" => Ok(MatrixKind::DenseRandom),
            "sparse_random" => Ok(MatrixKind::SparseRandom),
            other => Err(Error::InvalidArgument(format!(
                "unknown matrix kind `{other}` (expected csecoc, decoc_like, ova, ovo, dense_random or sparse_random)"
            ))),
        }
    }
}

/// Split recorded for a tree-built column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub score: f64,
}

/// `Nc x L` real coding matrix with row labels and per-column split records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodingMatrix {
    values: Array2<f64>,
    kind: MatrixKind,
    class_names: Vec<String>,
    column_meta: Vec<Option<ColumnMeta>>,
    duplicate_columns_allowed: bool,
}

impl CodingMatrix {
    /// Assembles a matrix from raw parts, checking only shape consistency;
    /// run [`validate_matrix`] for the full invariant set.
    pub fn from_parts(
        values: Array2<f64>,
        kind: MatrixKind,
        class_names: Vec<String>,
        column_meta: Vec<Option<ColumnMeta>>,
    ) -> Result<Self> {
        if class_names.len() != values.nrows() {
            return Err(Error::LengthMismatch {
                left: class_names.len(),
                right: values.nrows(),
            });
        }
        if column_meta.len() != values.ncols() {
            return Err(Error::LengthMismatch {
                left: column_meta.len(),
                right: values.ncols(),
            });
        }
        Ok(Self {
            values,
            kind,
            class_names,
            column_meta,
            duplicate_columns_allowed: false,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn value(&self, class: usize, column: usize) -> f64 {
        self.values[(class, column)]
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn column_meta(&self) -> &[Option<ColumnMeta>] {
        &self.column_meta
    }

    /// True when the requested column count exceeded the pool of distinct
    /// valid columns, so duplicates had to be permitted.
    pub fn duplicate_columns_allowed(&self) -> bool {
        self.duplicate_columns_allowed
    }

    /// Replaces the row labels (e.g. with a dataset's class names).
    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_classes() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: self.n_classes(),
            });
        }
        self.class_names = names;
        Ok(self)
    }

    /// Writes the matrix as CSV: header `class,H0,H1,...`, one row per
    /// class, entries with six fractional digits. The file round-trips
    /// exactly at that precision.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("class");
        for l in 0..self.n_columns() {
            out.push_str(&format!(",H{l}"));
        }
        out.push('\n');
        for r in 0..self.n_classes() {
            out.push_str(&self.class_names[r]);
            for l in 0..self.n_columns() {
                let v = self.values[(r, l)];
                let v = if v == 0.0 { 0.0 } else { v };
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a matrix CSV written by [`CodingMatrix::write_csv`]; returns the
/// class names and raw values (no kind or split records are stored in the
/// file).
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Array2<f64>)> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: display.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let mut names = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: display.clone(),
            message: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(Error::Csv {
                path: display.clone(),
                message: "matrix rows need a class name and at least one entry".into(),
            });
        }
        names.push(record[0].to_string());
        let mut row = Vec::with_capacity(record.len() - 1);
        for field in record.iter().skip(1) {
            row.push(field.trim().parse::<f64>().map_err(|e| Error::Csv {
                path: display.clone(),
                message: format!("bad matrix entry `{field}`: {e}"),
            })?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            path: display,
            message: "matrix file has no rows".into(),
        });
    }
    let cols = rows[0].len();
    let mut values = Array2::<f64>::zeros((rows.len(), cols));
    for (r, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Csv {
                path: display.clone(),
                message: format!("row {r} has {} entries, expected {cols}", row.len()),
            });
        }
        for (l, &v) in row.iter().enumerate() {
            values[(r, l)] = v;
        }
    }
    Ok((names, values))
}

/// Signed per-class coverage of a bipartition (one value per class of the
/// dataset).
///
/// For a class in `g1` it is `+` the fraction of its samples at least as
/// close to `centroid1` as to `centroid2`; for a class in `g2` it is `-` the
/// fraction strictly closer to `centroid2`; classes outside the partition
/// get `0`.
pub fn coverage(ds: &Dataset, part: &ClassPartition) -> Result<Vec<f64>> {
    let nc = ds.n_classes();
    let mut side = vec![0i8; nc];
    for &c in &part.g1 {
        if c >= nc {
            return Err(Error::InvalidArgument(format!(
                "class index {c} out of range"
            )));
        }
        side[c] = 1;
    }
    for &c in &part.g2 {
        if c >= nc {
            return Err(Error::InvalidArgument(format!(
                "class index {c} out of range"
            )));
        }
        side[c] = -1;
    }
    if part.centroid1.len() != ds.n_features() || part.centroid2.len() != ds.n_features() {
        return Err(Error::LengthMismatch {
            left: part.centroid1.len(),
            right: ds.n_features(),
        });
    }
    let mut hits = vec![0usize; nc];
    for (i, &label) in ds.labels().iter().enumerate() {
        if side[label] == 0 {
            continue;
        }
        let x = ds.row(i);
        let d1 = crate::partition::euclidean_distance(x, part.centroid1.view())?;
        let d2 = crate::partition::euclidean_distance(x, part.centroid2.view())?;
        let in_group_one = d1 <= d2;
        if (side[label] == 1 && in_group_one) || (side[label] == -1 && !in_group_one) {
            hits[label] += 1;
        }
    }
    Ok((0..nc)
        .map(|c| match side[c] {
            1 => hits[c] as f64 / ds.class_counts()[c] as f64,
            -1 => -(hits[c] as f64 / ds.class_counts()[c] as f64),
            _ => 0.0,
        })
        .collect())
}

fn build_tree(ds: &Dataset, eps: f64, soft: bool) -> Result<CodingMatrix> {
    let nc = ds.n_classes();
    if nc < 2 {
        return Err(Error::TooFewClasses);
    }
    let mut ctx = PartitionCtx::new(ds, eps);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(nc - 1);
    let mut metas: Vec<Option<ColumnMeta>> = Vec::with_capacity(nc - 1);
    let all: Vec<usize> = (0..nc).collect();

    // Depth-first: a group's column precedes its descendants', g1 subtree
    // before g2 subtree.
    fn split(
        ds: &Dataset,
        ctx: &mut PartitionCtx<'_>,
        group: &[usize],
        soft: bool,
        columns: &mut Vec<Vec<f64>>,
        metas: &mut Vec<Option<ColumnMeta>>,
    ) -> Result<()> {
        if group.len() < 2 {
            return Ok(());
        }
        let part = sffs_search(ctx, group)?.partition;
        let column = if soft {
            coverage(ds, &part)?
        } else {
            let mut col = vec![0.0; ds.n_classes()];
            for &c in &part.g1 {
                col[c] = 1.0;
            }
            for &c in &part.g2 {
                col[c] = -1.0;
            }
            col
        };
        columns.push(column);
        metas.push(Some(ColumnMeta {
            g1: part.g1.clone(),
            g2: part.g2.clone(),
            score: part.score,
        }));
        split(ds, ctx, &part.g1, soft, columns, metas)?;
        split(ds, ctx, &part.g2, soft, columns, metas)
    }
    split(ds, &mut ctx, &all, soft, &mut columns, &mut metas)?;

    debug_assert_eq!(columns.len(), nc - 1);
    let mut values = Array2::<f64>::zeros((nc, columns.len()));
    for (l, col) in columns.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            values[(r, l)] = v;
        }
    }
    Ok(CodingMatrix {
        values,
        kind: if soft {
            MatrixKind::Csecoc
        } else {
            MatrixKind::DecocLike
        },
        class_names: ds.class_names().to_vec(),
        column_meta: metas,
        duplicate_columns_allowed: false,
    })
}

/// Soft coding matrix: recursive splitting, one column per split, entries
/// are signed coverage values. Always `Nc - 1` columns.
pub fn build_csecoc(ds: &Dataset, eps: f64) -> Result<CodingMatrix> {
    build_tree(ds, eps, true)
}

/// Hard variant of the same tree: `+1` / `-1` inside a column's split, `0`
/// outside.
pub fn build_decoc_like(ds: &Dataset, eps: f64) -> Result<CodingMatrix> {
    build_tree(ds, eps, false)
}

fn dense_pool(nc: usize) -> u128 {
    // distinct two-sign ±1 columns up to complement
    if nc >= 120 {
        return u128::MAX;
    }
    (1u128 << (nc - 1)) - 1
}

fn sparse_pool(nc: usize) -> u128 {
    // (3^nc - 2^(nc+1) + 1) / 2 columns over {-1,0,1} with both signs,
    // up to complement
    if nc >= 75 {
        return u128::MAX;
    }
    let pow3 = 3u128.pow(nc as u32);
    let pow2 = 1u128 << (nc + 1);
    (pow3 - pow2 + 1) / 2
}

fn column_has_both_signs(col: &[i8]) -> bool {
    col.iter().any(|&v| v > 0) && col.iter().any(|&v| v < 0)
}

fn column_conflicts(col: &[i8], previous: &[Vec<i8>]) -> bool {
    previous.iter().any(|p| {
        p.iter().zip(col).all(|(&a, &b)| a == b)
            || p.iter().zip(col).all(|(&a, &b)| a == -b)
    })
}

fn rows_valid(matrix: &[Vec<i8>], nc: usize) -> bool {
    let row = |r: usize| matrix.iter().map(move |col| col[r]);
    for r in 0..nc {
        if row(r).all(|v| v == matrix[0][r]) {
            return false; // all-equal row
        }
        for r2 in (r + 1)..nc {
            if row(r).zip(row(r2)).all(|(a, b)| a == b) {
                return false; // duplicate rows
            }
        }
    }
    true
}

fn min_row_distance(matrix: &[Vec<i8>], nc: usize) -> f64 {
    // generalized Hamming distance: 0 entries count 1/2 against ±1
    let mut min = f64::INFINITY;
    for r in 0..nc {
        for r2 in (r + 1)..nc {
            let d: f64 = matrix
                .iter()
                .map(|col| (col[r] - col[r2]).abs() as f64 / 2.0)
                .sum();
            if d < min {
                min = d;
            }
        }
    }
    min
}

fn draw_random_matrix<R: Rng>(
    rng: &mut R,
    nc: usize,
    n_columns: usize,
    sparse: bool,
    allow_duplicates: bool,
) -> Option<Vec<Vec<i8>>> {
    let mut columns: Vec<Vec<i8>> = Vec::with_capacity(n_columns);
    for _ in 0..n_columns {
        let mut accepted = None;
        for _ in 0..COLUMN_RETRY {
            let col: Vec<i8> = (0..nc)
                .map(|_| {
                    if sparse {
                        match rng.random_range(0..4u8) {
                            0 => -1,
                            3 => 1,
                            _ => 0,
                        }
                    } else if rng.random_range(0..2u8) == 0 {
                        -1
                    } else {
                        1
                    }
                })
                .collect();
            if !column_has_both_signs(&col) {
                continue;
            }
            if !allow_duplicates && column_conflicts(&col, &columns) {
                continue;
            }
            accepted = Some(col);
            break;
        }
        columns.push(accepted?);
    }
    if rows_valid(&columns, nc) {
        Some(columns)
    } else {
        None
    }
}

/// One-vs-all, one-vs-one, or best-of-`candidates` random ternary matrix
/// for `nc` classes. Row labels default to `C0..C{nc-1}`.
///
/// Random kinds keep the draw maximizing the minimum pairwise row distance
/// among valid draws (both signs per column, no duplicate or complement
/// columns, no duplicate or all-equal rows); when the requested length
/// exceeds the pool of distinct valid columns the duplicate-column rule is
/// waived and the matrix is flagged. Errors if no draw is valid within the
/// `candidates` budget.
pub fn build_baseline(
    kind: MatrixKind,
    nc: usize,
    seed: u64,
    candidates: usize,
) -> Result<CodingMatrix> {
    if nc < 2 {
        return Err(Error::TooFewClasses);
    }
    let class_names: Vec<String> = (0..nc).map(|c| format!("C{c}")).collect();
    let make = |values: Array2<f64>, duplicate_columns_allowed: bool| CodingMatrix {
        column_meta: vec![None; values.ncols()],
        values,
        kind,
        class_names: class_names.clone(),
        duplicate_columns_allowed,
    };
    match kind {
        MatrixKind::Ova => {
            let mut values = Array2::<f64>::from_elem((nc, nc), -1.0);
            for c in 0..nc {
                values[(c, c)] = 1.0;
            }
            Ok(make(values, false))
        }
        MatrixKind::Ovo => {
            let n_columns = nc * (nc - 1) / 2;
            let mut values = Array2::<f64>::zeros((nc, n_columns));
            let mut l = 0;
            for i in 0..nc {
                for j in (i + 1)..nc {
                    values[(i, l)] = 1.0;
                    values[(j, l)] = -1.0;
                    l += 1;
                }
            }
            Ok(make(values, false))
        }
        MatrixKind::DenseRandom | MatrixKind::SparseRandom => {
            if candidates == 0 {
                return Err(Error::InvalidArgument("candidates must be >= 1".into()));
            }
            let sparse = kind == MatrixKind::SparseRandom;
            let n_columns = kind.ensemble_size(nc);
            let pool = if sparse { sparse_pool(nc) } else { dense_pool(nc) };
            let allow_duplicates = (n_columns as u128) > pool;
            let mut rng = seeded_rng(seed, &[ROLE_MATRIX, kind.tag_for_seed()]);
            let mut best: Option<(f64, Vec<Vec<i8>>)> = None;
            for _ in 0..candidates {
                if let Some(m) = draw_random_matrix(&mut rng, nc, n_columns, sparse, allow_duplicates)
                {
                    let score = min_row_distance(&m, nc);
                    if best.as_ref().is_none_or(|(bs, _)| score > *bs) {
                        best = Some((score, m));
                    }
                }
            }
            let (_, columns) = best.ok_or_else(|| {
                Error::MatrixGeneration(format!(
                    "no valid {kind} matrix for {nc} classes within {candidates} candidate draws"
                ))
            })?;
            let mut values = Array2::<f64>::zeros((nc, n_columns));
            for (l, col) in columns.iter().enumerate() {
                for (r, &v) in col.iter().enumerate() {
                    values[(r, l)] = v as f64;
                }
            }
            Ok(make(values, allow_duplicates))
        }
        MatrixKind::Csecoc | MatrixKind::DecocLike => Err(Error::InvalidArgument(
            "tree kinds are built from a dataset; use build_csecoc / build_decoc_like".into(),
        )),
    }
}

/// Builds any matrix kind against a dataset; baseline kinds keep the
/// dataset's class names.
pub fn build_matrix(
    ds: &Dataset,
    kind: MatrixKind,
    eps: f64,
    seed: u64,
    candidates: usize,
) -> Result<CodingMatrix> {
    match kind {
        MatrixKind::Csecoc => build_csecoc(ds, eps),
        MatrixKind::DecocLike => build_decoc_like(ds, eps),
        _ => build_baseline(kind, ds.n_classes(), seed, candidates)?
            .with_class_names(ds.class_names().to_vec()),
    }
}

/// Violations break a matrix invariant; notes record permitted oddities
/// (zero-coverage classes, duplicate columns under an exhausted pool).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "matrix valid ({} notes)", self.notes.len())?;
        } else {
            writeln!(f, "matrix INVALID ({} violations)", self.violations.len())?;
        }
        for v in &self.violations {
            writeln!(f, "  violation: {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Kind-agnostic checks on raw values: entry range, both signs per column,
/// duplicate rows and duplicate/complement columns.
pub fn validate_values(values: ArrayView2<'_, f64>) -> ValidityReport {
    let mut report = ValidityReport::default();
    let (nc, nl) = values.dim();
    for ((r, l), &v) in values.indexed_iter() {
        if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
            report
                .violations
                .push(format!("entry ({r},{l}) = {v} outside [-1, 1]"));
        }
    }
    for l in 0..nl {
        let col = values.column(l);
        if !col.iter().any(|&v| v > 0.0) {
            report
                .violations
                .push(format!("column {l} lacks a strictly positive entry"));
        }
        if !col.iter().any(|&v| v < 0.0) {
            report
                .violations
                .push(format!("column {l} lacks a strictly negative entry"));
        }
    }
    for r in 0..nc {
        for r2 in (r + 1)..nc {
            if values.row(r) == values.row(r2) {
                report
                    .violations
                    .push(format!("duplicate rows {r} and {r2}"));
            }
        }
    }
    for l in 0..nl {
        for l2 in (l + 1)..nl {
            let a = values.column(l);
            let b = values.column(l2);
            if a == b {
                report
                    .violations
                    .push(format!("duplicate columns {l} and {l2}"));
            } else if a.iter().zip(b.iter()).all(|(&x, &y)| x == -y) {
                report
                    .violations
                    .push(format!("columns {l} and {l2} are complements"));
            }
        }
    }
    report
}

fn verify_tree_consistency(m: &CodingMatrix, report: &mut ValidityReport) {
    // the recorded splits must form a depth-first binary tree over the
    // class set: each column's g1 ∪ g2 equals its parent group
    fn walk(
        metas: &[Option<ColumnMeta>],
        next: usize,
        group: &[usize],
        report: &mut ValidityReport,
    ) -> Option<usize> {
        if group.len() < 2 {
            return Some(next);
        }
        let Some(Some(meta)) = metas.get(next) else {
            report
                .violations
                .push(format!("missing split record for column {next}"));
            return None;
        };
        let mut union: Vec<usize> = meta.g1.iter().chain(meta.g2.iter()).copied().collect();
        union.sort_unstable();
        if union.as_slice() != group {
            report.violations.push(format!(
                "column {next}: split {:?} | {:?} does not cover its group {group:?}",
                meta.g1, meta.g2
            ));
            return None;
        }
        let after_g1 = walk(metas, next + 1, &meta.g1.clone(), report)?;
        walk(metas, after_g1, &meta.g2.clone(), report)
    }
    let all: Vec<usize> = (0..m.n_classes()).collect();
    if let Some(consumed) = walk(m.column_meta(), 0, &all, report) {
        if consumed != m.n_columns() {
            report.violations.push(format!(
                "split records cover {consumed} columns, matrix has {}",
                m.n_columns()
            ));
        }
    }
}

/// Checks every invariant of a built matrix and reports violations without
/// mutating anything.
pub fn validate_matrix(m: &CodingMatrix) -> ValidityReport {
    let mut report = validate_values(m.values());
    if m.kind().is_random() && m.duplicate_columns_allowed() {
        // requested length exceeds the distinct-column pool for this class
        // count; duplicate/complement columns are expected
        report.violations.retain(|v| {
            !(v.starts_with("duplicate columns") || v.contains("are complements"))
        });
        report.notes.push(
            "duplicate or complement columns permitted: requested length exceeds the distinct column pool"
                .into(),
        );
    }
    let nc = m.n_classes();
    match m.kind() {
        MatrixKind::Csecoc | MatrixKind::DecocLike => {
            if m.n_columns() != nc - 1 {
                report.violations.push(format!(
                    "tree matrix must have Nc-1 = {} columns, found {}",
                    nc - 1,
                    m.n_columns()
                ));
            }
            for (l, meta) in m.column_meta().iter().enumerate() {
                let Some(meta) = meta else {
                    report
                        .violations
                        .push(format!("column {l} has no split record"));
                    continue;
                };
                for r in 0..nc {
                    let v = m.value(r, l);
                    let in_g1 = meta.g1.contains(&r);
                    let in_g2 = meta.g2.contains(&r);
                    if in_g1 {
                        if v < 0.0 {
                            report.violations.push(format!(
                                "entry ({r},{l}) = {v} negative for a positive-group class"
                            ));
                        } else if v == 0.0 {
                            report.notes.push(format!(
                                "zero coverage for class {r} in column {l}"
                            ));
                        }
                    } else if in_g2 {
                        if v > 0.0 {
                            report.violations.push(format!(
                                "entry ({r},{l}) = {v} positive for a negative-group class"
                            ));
                        } else if v == 0.0 {
                            report.notes.push(format!(
                                "zero coverage for class {r} in column {l}"
                            ));
                        }
                    } else if v != 0.0 {
                        report.violations.push(format!(
                            "entry ({r},{l}) = {v} nonzero outside the column's split"
                        ));
                    }
                    if m.kind() == MatrixKind::DecocLike
                        && v != 0.0
                        && v != 1.0
                        && v != -1.0
                    {
                        report
                            .violations
                            .push(format!("entry ({r},{l}) = {v} not ternary"));
                    }
                }
            }
            verify_tree_consistency(m, &mut report);
        }
        MatrixKind::Ova => {
            let ok = m.n_columns() == nc
                && (0..nc).all(|r| {
                    (0..nc).all(|l| m.value(r, l) == if r == l { 1.0 } else { -1.0 })
                });
            if !ok {
                report
                    .violations
                    .push("matrix does not match the one-vs-all pattern".into());
            }
        }
        MatrixKind::Ovo => {
            let expected = MatrixKind::Ovo.ensemble_size(nc);
            let mut ok = m.n_columns() == expected;
            if ok {
                let mut l = 0;
                'outer: for i in 0..nc {
                    for j in (i + 1)..nc {
                        for r in 0..nc {
                            let want = if r == i {
                                1.0
                            } else if r == j {
                                -1.0
                            } else {
                                0.0
                            };
                            if m.value(r, l) != want {
                                ok = false;
                                break 'outer;
                            }
                        }
                        l += 1;
                    }
                }
            }
            if !ok {
                report
                    .violations
                    .push("matrix does not match the one-vs-one pattern".into());
            }
        }
        MatrixKind::DenseRandom | MatrixKind::SparseRandom => {
            for ((r, l), &v) in m.values().indexed_iter() {
                if v != 0.0 && v != 1.0 && v != -1.0 {
                    report
                        .violations
                        .push(format!("entry ({r},{l}) = {v} not ternary"));
                }
                if m.kind() == MatrixKind::DenseRandom && v == 0.0 {
                    report
                        .violations
                        .push(format!("entry ({r},{l}) is zero in a dense matrix"));
                }
            }
            let values = m.values();
            for r in 0..nc {
                let row = values.row(r);
                if row.iter().all(|&v| v == row[0]) {
                    report
                        .violations
                        .push(format!("row {r} has the same entry in every column"));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::DEFAULT_EPS;
    use crate::test_util::{iris, point_classes};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn evaluate_partition(ds: &Dataset, g1: &[usize], g2: &[usize]) -> ClassPartition {
        let mut ctx = PartitionCtx::new(ds, DEFAULT_EPS);
        ctx.partition(g1.to_vec(), g2.to_vec()).unwrap()
    }

    #[test]
    fn coverage_is_signed_unit_on_separated_point_classes() {
        let ds = point_classes(&[0.0, 10.0, 11.0], 3);
        let part = evaluate_partition(&ds, &[0], &[1, 2]);
        let cov = coverage(&ds, &part).unwrap();
        assert_eq!(cov, vec![1.0, -1.0, -1.0]);
    }

    #[test]
    fn coverage_counts_three_of_four() {
        // class 0: three samples at (0,0), one at (8,0) -> centroid (2,0);
        // class 1: four samples at (8,0)
        let features = array![
            [0.0, 0.0],
            [0.0, 0.0],
            [0.0, 0.0],
            [8.0, 0.0],
            [8.0, 0.0],
            [8.0, 0.0],
            [8.0, 0.0],
            [8.0, 0.0],
        ];
        let ds = Dataset::new(
            features,
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let part = evaluate_partition(&ds, &[0], &[1]);
        let cov = coverage(&ds, &part).unwrap();
        assert_abs_diff_eq!(cov[0], 0.75);
        assert_abs_diff_eq!(cov[1], -1.0);
    }

    #[test]
    fn coverage_magnitude_times_count_is_integral() {
        let ds = iris();
        let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        for l in 0..m.n_columns() {
            for r in 0..m.n_classes() {
                let v = m.value(r, l).abs();
                let n = ds.class_counts()[r] as f64;
                let count = (v * n).round();
                assert_eq!(count / n, v, "entry ({r},{l}) is not a count / N");
            }
        }
    }

    #[test]
    fn csecoc_two_classes_is_one_signed_column() {
        let ds = point_classes(&[0.0, 5.0], 2);
        let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        assert_eq!(m.n_columns(), 1);
        assert_eq!(m.n_classes(), 2);
        let col: Vec<f64> = (0..2).map(|r| m.value(r, 0)).collect();
        assert!(col.iter().any(|&v| v > 0.0) && col.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn csecoc_three_point_classes_structure() {
        // classes at 0, 1, 9: first split isolates 9 from {0,1}, second
        // splits {0}|{1}; all samples sit on their class centroid so every
        // in-split entry is ±1
        let ds = point_classes(&[0.0, 1.0, 9.0], 2);
        let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        assert_eq!(m.n_columns(), 2);
        let meta0 = m.column_meta()[0].as_ref().unwrap();
        let mut groups = [meta0.g1.clone(), meta0.g2.clone()];
        groups.sort();
        assert_eq!(groups, [vec![0, 1], vec![2]]);
        for r in 0..3 {
            assert_abs_diff_eq!(m.value(r, 0).abs(), 1.0);
        }
        let meta1 = m.column_meta()[1].as_ref().unwrap();
        assert_eq!(meta1.g1, vec![0]);
        assert_eq!(meta1.g2, vec![1]);
        assert_abs_diff_eq!(m.value(0, 1), 1.0);
        assert_abs_diff_eq!(m.value(1, 1), -1.0);
        assert_abs_diff_eq!(m.value(2, 1), 0.0);
    }

    #[test]
    fn csecoc_column_count_is_classes_minus_one() {
        for positions in [&[0.0, 4.0][..], &[0.0, 4.0, 9.0][..], &[0.0, 2.0, 7.0, 9.0, 15.0][..]] {
            let ds = point_classes(positions, 3);
            let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
            assert_eq!(m.n_columns(), positions.len() - 1);
        }
        let iris = iris();
        assert_eq!(build_csecoc(&iris, DEFAULT_EPS).unwrap().n_columns(), 2);
    }

    #[test]
    fn first_tree_column_covers_every_class() {
        let ds = iris();
        let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        for r in 0..m.n_classes() {
            assert!(m.value(r, 0) != 0.0, "root column has a zero for class {r}");
        }
    }

    #[test]
    fn decoc_sign_pattern_matches_csecoc() {
        let ds = iris();
        let soft = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        let hard = build_decoc_like(&ds, DEFAULT_EPS).unwrap();
        assert_eq!(soft.n_columns(), hard.n_columns());
        for l in 0..soft.n_columns() {
            for r in 0..soft.n_classes() {
                let s = soft.value(r, l);
                let h = hard.value(r, l);
                let expected = if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(expected, h, "sign mismatch at ({r},{l})");
            }
        }
    }

    #[test]
    fn decoc_three_classes_is_ternary_with_one_zero_column() {
        let ds = point_classes(&[0.0, 1.0, 9.0], 2);
        let m = build_decoc_like(&ds, DEFAULT_EPS).unwrap();
        assert_eq!(m.n_columns(), 2);
        let zeros = (0..3).filter(|&r| m.value(r, 1) == 0.0).count();
        assert_eq!(zeros, 1);
        for ((_, _), &v) in m.values().indexed_iter() {
            assert!(v == 0.0 || v == 1.0 || v == -1.0);
        }
    }

    #[test]
    fn decoc_partitions_match_an_independent_sffs_run() {
        let ds = iris();
        let m = build_decoc_like(&ds, DEFAULT_EPS).unwrap();
        let root = m.column_meta()[0].as_ref().unwrap();
        let p = crate::partition::sffs_bipartition(&ds, &[0, 1, 2], DEFAULT_EPS).unwrap();
        assert_eq!(root.g1, p.g1);
        assert_eq!(root.g2, p.g2);
        assert_eq!(root.score, p.score);
    }

    #[test]
    fn ova_is_signed_identity() {
        let m = build_baseline(MatrixKind::Ova, 3, 0, 1).unwrap();
        assert_eq!(m.n_columns(), 3);
        for r in 0..3 {
            for l in 0..3 {
                assert_eq!(m.value(r, l), if r == l { 1.0 } else { -1.0 });
            }
        }
        assert!(validate_matrix(&m).is_valid());
    }

    #[test]
    fn ovo_four_classes_has_six_columns() {
        let m = build_baseline(MatrixKind::Ovo, 4, 0, 1).unwrap();
        assert_eq!(m.n_columns(), 6);
        let values = m.values();
        for l in 0..6 {
            let col = values.column(l);
            assert_eq!(col.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == -1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == 0.0).count(), 2);
        }
        assert!(validate_matrix(&m).is_valid());
    }

    #[test]
    fn dense_random_six_classes_has_26_distinct_columns() {
        let m = build_baseline(MatrixKind::DenseRandom, 6, 7, 50).unwrap();
        assert_eq!(m.n_columns(), 26);
        assert!(!m.duplicate_columns_allowed());
        let report = validate_matrix(&m);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn sparse_random_keeps_both_signs_per_column() {
        let m = build_baseline(MatrixKind::SparseRandom, 6, 7, 50).unwrap();
        assert_eq!(m.n_columns(), 39);
        let values = m.values();
        for l in 0..m.n_columns() {
            let col = values.column(l);
            assert!(col.iter().any(|&v| v > 0.0) && col.iter().any(|&v| v < 0.0));
        }
        assert!(validate_matrix(&m).is_valid());
    }

    #[test]
    fn random_matrices_for_small_class_counts_permit_duplicates() {
        // 3 classes admit only 3 distinct two-sign ±1 columns but the dense
        // length is 16, so duplicates must be waived (and noted)
        let m = build_baseline(MatrixKind::DenseRandom, 3, 9, 50).unwrap();
        assert_eq!(m.n_columns(), 16);
        assert!(m.duplicate_columns_allowed());
        let report = validate_matrix(&m);
        assert!(report.is_valid(), "{report}");
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn random_matrices_are_deterministic_in_the_seed() {
        let a = build_baseline(MatrixKind::SparseRandom, 5, 11, 30).unwrap();
        let b = build_baseline(MatrixKind::SparseRandom, 5, 11, 30).unwrap();
        assert_eq!(a.values(), b.values());
        let c = build_baseline(MatrixKind::SparseRandom, 5, 12, 30).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn validate_flags_single_sign_column_and_duplicate_rows() {
        let ds = iris();
        let mut m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        assert!(validate_matrix(&m).is_valid());

        // corrupt: make column 1 all-positive
        for r in 0..m.n_classes() {
            let v = m.values[(r, 1)].abs().max(0.5);
            m.values[(r, 1)] = v;
        }
        let report = validate_matrix(&m);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("lacks a strictly negative entry")));

        // duplicate rows on a fresh 6x5-shaped matrix
        let values = array![
            [1.0, 1.0, 0.5, 0.0, 0.0],
            [1.0, 1.0, 0.5, 0.0, 0.0],
            [-1.0, 0.0, -1.0, 1.0, 0.0],
            [-1.0, 0.0, -1.0, -1.0, 1.0],
            [-1.0, -1.0, 0.0, 0.0, -1.0],
            [-1.0, -1.0, 0.5, 0.0, -1.0],
        ];
        let report = validate_values(values.view());
        assert!(report
            .violations
            .iter()
            .any(|v| v.starts_with("duplicate rows")));
    }

    #[test]
    fn validate_flags_out_of_range_entries() {
        let values = array![[1.5, -1.0], [-1.0, 1.0]];
        let report = validate_values(values.view());
        assert!(report.violations.iter().any(|v| v.contains("outside")));
    }

    #[test]
    fn csv_round_trips_at_six_digits() {
        let ds = iris();
        let m = build_csecoc(&ds, DEFAULT_EPS).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.csv");
        m.write_csv(&path).unwrap();
        let (names, values) = read_matrix_csv(&path).unwrap();
        assert_eq!(names, m.class_names());
        // the file is the fixed point: writing the parsed values again
        // reproduces it byte for byte
        let reread = CodingMatrix {
            values,
            kind: m.kind(),
            class_names: names,
            column_meta: vec![None; m.n_columns()],
            duplicate_columns_allowed: false,
        };
        assert_eq!(reread.to_csv_string(), m.to_csv_string());
    }

    #[test]
    fn kind_strings_round_trip() {
        for kind in MatrixKind::ALL {
            assert_eq!(kind.as_str().parse::<MatrixKind>().unwrap(), kind);
        }
        assert!("nope".parse::<MatrixKind>().is_err());
    }
}
