//! Base learners trained on one coding-matrix column each.
//!
//! Two families memorize the training set (KNN regressor and classifier,
//! both k-nearest by Euclidean distance with ties broken by lower training
//! index); the third solves an RBF kernel ridge system and stands in for a
//! support-vector regressor.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learner family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerFamily {
    KnnRegressor,
    KnnClassifier,
    KernelRidge,
}

impl LearnerFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerFamily::KnnRegressor => "knn_regressor",
            LearnerFamily::KnnClassifier => "knn_classifier",
            LearnerFamily::KernelRidge => "kernel_ridge",
        }
    }

    pub fn is_classifier(&self) -> bool {
        matches!(self, LearnerFamily::KnnClassifier)
    }
}

impl std::fmt::Display for LearnerFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LearnerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn_regressor" => Ok(LearnerFamily::KnnRegressor),
            "knn_classifier" => Ok(LearnerFamily::KnnClassifier),
            "kernel_ridge" => Ok(LearnerFamily::KernelRidge),
            other => Err(Error::InvalidArgument(format!(
                "unknown learner family `{other}`"
            ))),
        }
    }
}

/// Hyperparameters. `gamma = None` means the RBF width defaults to
/// `1 / n_features` at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub family: LearnerFamily,
    pub k: usize,
    pub gamma: Option<f64>,
    pub ridge_lambda: f64,
}

impl LearnerSpec {
    pub fn knn_regressor(k: usize) -> Self {
        Self {
            family: LearnerFamily::KnnRegressor,
            k,
            gamma: None,
            ridge_lambda: 1.0,
        }
    }

    pub fn knn_classifier(k: usize) -> Self {
        Self {
            family: LearnerFamily::KnnClassifier,
            k,
            gamma: None,
            ridge_lambda: 1.0,
        }
    }

    pub fn kernel_ridge(gamma: Option<f64>, ridge_lambda: f64) -> Self {
        Self {
            family: LearnerFamily::KernelRidge,
            k: 5,
            gamma,
            ridge_lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::InvalidArgument(format!("gamma must be > 0, got {g}")));
            }
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ridge_lambda must be >= 0, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }
}

impl Default for LearnerSpec {
    fn default() -> Self {
        Self::knn_regressor(5)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum LearnerState {
    Knn {
        x: Array2<f64>,
        y: Vec<f64>,
    },
    KernelRidge {
        x: Array2<f64>,
        alpha: Vec<f64>,
        gamma: f64,
    },
}

/// A fitted base learner; `predict` is deterministic given the state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedLearner {
    spec: LearnerSpec,
    state: LearnerState,
    fingerprint: u64,
}

fn fingerprint(x: ArrayView2<'_, f64>, y: &[f64], family: LearnerFamily) -> u64 {
    // FNV-1a over the raw bit patterns
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(family as u64);
    eat(x.nrows() as u64);
    eat(x.ncols() as u64);
    for &v in x.iter() {
        eat(v.to_bits());
    }
    for &v in y {
        eat(v.to_bits());
    }
    h
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Solves `A x = y` for symmetric positive definite `A` via an in-place
/// Cholesky factorization. `A` is destroyed.
fn cholesky_solve(a: &mut Array2<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= a[(j, k)] * a[(j, k)];
        }
        if diag <= 1e-12 {
            return Err(Error::SingularKernel);
        }
        let diag = diag.sqrt();
        a[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = v / diag;
        }
    }
    // forward then back substitution on the lower factor
    let mut z = y.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= a[(i, k)] * z[k];
        }
        z[i] /= a[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            z[i] -= a[(k, i)] * z[k];
        }
        z[i] /= a[(i, i)];
    }
    Ok(z)
}

/// Fits a learner on `x` (n x Lf) with targets `y`.
///
/// KNN families store the training set; the classifier additionally requires
/// `±1` targets. Kernel ridge solves `(K + lambda I) alpha = y` with
/// `K_ij = exp(-gamma ||x_i - x_j||^2)`.
pub fn fit(spec: &LearnerSpec, x: ArrayView2<'_, f64>, y: &[f64]) -> Result<TrainedLearner> {
    spec.validate()?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite training inputs".into(),
        ));
    }
    let fp = fingerprint(x, y, spec.family);
    let state = match spec.family {
        LearnerFamily::KnnRegressor => LearnerState::Knn {
            x: x.to_owned(),
            y: y.to_vec(),
        },
        LearnerFamily::KnnClassifier => {
            if y.iter().any(|&v| v != 1.0 && v != -1.0) {
                return Err(Error::InvalidArgument(
                    "classifier targets must be ±1".into(),
                ));
            }
            LearnerState::Knn {
                x: x.to_owned(),
                y: y.to_vec(),
            }
        }
        LearnerFamily::KernelRidge => {
            let gamma = spec.gamma.unwrap_or(1.0 / x.ncols().max(1) as f64);
            let mut k = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let v = (-gamma * squared_distance(x.row(i), x.row(j))).exp();
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
                k[(i, i)] += spec.ridge_lambda;
            }
            let alpha = cholesky_solve(&mut k, y)?;
            LearnerState::KernelRidge {
                x: x.to_owned(),
                alpha,
                gamma,
            }
        }
    };
    Ok(TrainedLearner {
        spec: *spec,
        state,
        fingerprint: fp,
    })
}

impl TrainedLearner {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Indices of the k nearest training points, distance ties broken by
    /// lower index; k truncates to the training size.
    fn nearest(&self, x: &Array2<f64>, query: ArrayView1<'_, f64>, k: usize) -> Vec<usize> {
        let n = x.nrows();
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|i| (squared_distance(x.row(i), query), i))
            .collect();
        let k = k.min(n);
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < n {
            order.select_nth_unstable_by(k - 1, cmp);
        }
        order.truncate(k);
        order.into_iter().map(|(_, i)| i).collect()
    }

    /// Prediction for one query row.
    pub fn predict(&self, query: ArrayView1<'_, f64>) -> Result<f64> {
        match &self.state {
            LearnerState::Knn { x, y } => {
                if query.len() != x.ncols() {
                    return Err(Error::LengthMismatch {
                        left: query.len(),
                        right: x.ncols(),
                    });
                }
                let idx = self.nearest(x, query, self.spec.k);
                match self.spec.family {
                    LearnerFamily::KnnRegressor => {
                        Ok(idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64)
                    }
                    LearnerFamily::KnnClassifier => {
                        let sum: f64 = idx.iter().map(|&i| y[i]).sum();
                        Ok(if sum >= 0.0 { 1.0 } else { -1.0 })
                    }
                    LearnerFamily::KernelRidge => unreachable!("state matches family"),
                }
            }
            LearnerState::KernelRidge { x, alpha, gamma } => {
                if query.len() != x.ncols() {
                    return Err(Error::LengthMismatch {
                        left: query.len(),
                        right: x.ncols(),
                    });
                }
                Ok((0..x.nrows())
                    .map(|i| alpha[i] * (-gamma * squared_distance(x.row(i), query)).exp())
                    .sum())
            }
        }
    }
}
