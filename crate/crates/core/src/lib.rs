//! Multiclass classification with error-correcting output codes.
//!
//! The crate decomposes a multiclass problem into binary (or regression)
//! subproblems defined by the columns of a coding matrix, trains one base
//! learner per column, and classifies by least-loss decoding against the
//! codeword rows. Besides the classic one-vs-all, one-vs-one and random
//! ternary designs, it builds data-driven matrices by recursively splitting
//! the class set with a centroid-distance criterion, either with hard `±1`
//! entries (`decoc_like`) or with soft entries in `[-1, 1]` that carry the
//! per-class coverage of its group assignment (`csecoc`).
//!
//! Modules follow the processing pipeline:
//!
//! * [`data`] — CSV ingestion, class statistics, stratified fold plans
//! * [`partition`] — bipartition scoring and the floating search
//! * [`coding`] — coding matrix builders and validation
//! * [`learners`] — KNN and RBF kernel-ridge base learners
//! * [`pipeline`] — per-column training and least-loss decoding
//! * [`eval`] — class-averaged metrics, repeated CV, benchmark reports
//! * [`oracle`] — brute-force reference checks wired to `oracle-check`

pub mod coding;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod learners;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod rng;

pub use data::{load_csv, stratified_folds, CsvSchema, Dataset, FoldPlan, LabelColumn, MissingPolicy};
pub use error::{Error, Result};
pub use partition::{
    euclidean_distance, exhaustive_bipartition, group_centroid, inner_group_distance,
    partition_score, sffs_bipartition, ClassPartition, DEFAULT_EPS,
};

#[cfg(test)]
pub(crate) mod test_util {
    use crate::data::{load_csv, CsvSchema, Dataset};
    use ndarray::Array2;

    /// The iris CSV shipped under `data/`.
    pub fn iris() -> Dataset {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/iris.csv");
        load_csv(path, &CsvSchema::default()).expect("data/iris.csv should load")
    }

    /// One point-mass class per entry of `positions`, `per_class` identical
    /// 1-d samples each. Class `i` sits exactly at `positions[i]`.
    pub fn point_classes(positions: &[f64], per_class: usize) -> Dataset {
        let m = positions.len() * per_class;
        let mut features = Array2::<f64>::zeros((m, 1));
        let mut labels = Vec::with_capacity(m);
        for (c, &x) in positions.iter().enumerate() {
            for s in 0..per_class {
                features[(c * per_class + s, 0)] = x;
                labels.push(c);
            }
        }
        let names = (0..positions.len()).map(|c| format!("C{c}")).collect();
        Dataset::new(features, labels, names).unwrap()
    }
}
