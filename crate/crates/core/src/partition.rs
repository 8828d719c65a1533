//! Class bipartition scoring and search.
//!
//! A candidate split of a class group into `(g1, g2)` is scored by the ratio
//! of the distance between the two group centroids to the sum of the mean
//! pairwise class-centroid distances inside each group; larger is better.
//! [`sffs_bipartition`] searches for a good split with sequential forward
//! floating selection, [`exhaustive_bipartition`] enumerates every split and
//! is the reference the search is measured against.

use std::collections::HashMap;

use ndarray::{Array1, ArrayView1};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default clamp for the score denominator.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Relative tolerance for accepting a score improvement during the search.
pub(crate) const SCORE_REL_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn score_tolerance(score: f64) -> f64 {
    SCORE_REL_TOL * score.abs().max(1.0)
}

/// A bipartition of a class subset with its score and group centroids.
/// `g1` is the side built by inclusion (the positive group).
#[derive(Debug, Clone)]
pub struct ClassPartition {
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub score: f64,
    pub centroid1: Array1<f64>,
    pub centroid2: Array1<f64>,
}

/// Plain Euclidean distance; errors on length mismatch.
pub fn euclidean_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

fn check_group(ds: &Dataset, g: &[usize]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::EmptyGroup);
    }
    for &c in g {
        if c >= ds.n_classes() {
            return Err(Error::InvalidArgument(format!(
                "class index {c} out of range"
            )));
        }
    }
    Ok(())
}

/// Mean pairwise distance among the class centroids of `g`; zero for a
/// singleton group.
pub fn inner_group_distance(ds: &Dataset, g: &[usize]) -> Result<f64> {
    check_group(ds, g)?;
    let t = g.len();
    if t <= 1 {
        return Ok(0.0);
    }
    let centroids: Vec<Array1<f64>> = g
        .iter()
        .map(|&c| ds.class_centroid(c))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for p in 0..t {
        for q in (p + 1)..t {
            sum += euclidean_distance(centroids[p].view(), centroids[q].view())?;
        }
    }
    Ok(2.0 / (t as f64 * (t - 1) as f64) * sum)
}

/// Componentwise mean over all samples whose class is in `g`
/// (sample-weighted, not a mean of class centroids).
pub fn group_centroid(ds: &Dataset, g: &[usize]) -> Result<Array1<f64>> {
    check_group(ds, g)?;
    let mut member = vec![false; ds.n_classes()];
    for &c in g {
        member[c] = true;
    }
    let mut sum = Array1::<f64>::zeros(ds.n_features());
    let mut count = 0usize;
    for (i, &label) in ds.labels().iter().enumerate() {
        if member[label] {
            sum += &ds.features().row(i);
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// Ratio of the centroid distance between the groups to the sum of their
/// inner-group distances, with the denominator clamped to `eps`.
pub fn partition_score(ds: &Dataset, g1: &[usize], g2: &[usize], eps: f64) -> Result<f64> {
    check_group(ds, g1)?;
    check_group(ds, g2)?;
    if g1.iter().any(|c| g2.contains(c)) {
        return Err(Error::InvalidArgument(
            "bipartition groups must be disjoint".into(),
        ));
    }
    let c1 = group_centroid(ds, g1)?;
    let c2 = group_centroid(ds, g2)?;
    let numerator = euclidean_distance(c1.view(), c2.view())?;
    let denominator = (inner_group_distance(ds, g1)? + inner_group_distance(ds, g2)?).max(eps);
    Ok(numerator / denominator)
}

/// Cached evaluation context used by the searches. All cached values are
/// produced by the same arithmetic as the public functions, so scores stored
/// in a [`ClassPartition`] reproduce `partition_score` exactly.
pub(crate) struct PartitionCtx<'d> {
    ds: &'d Dataset,
    eps: f64,
    centroid_cache: HashMap<Vec<usize>, Array1<f64>>,
    inner_cache: HashMap<Vec<usize>, f64>,
}

impl<'d> PartitionCtx<'d> {
    pub(crate) fn new(ds: &'d Dataset, eps: f64) -> Self {
        Self {
            ds,
            eps,
            centroid_cache: HashMap::new(),
            inner_cache: HashMap::new(),
        }
    }

    fn centroid(&mut self, g: &[usize]) -> Result<Array1<f64>> {
        if let Some(c) = self.centroid_cache.get(g) {
            return Ok(c.clone());
        }
        let c = group_centroid(self.ds, g)?;
        self.centroid_cache.insert(g.to_vec(), c.clone());
        Ok(c)
    }

    fn inner(&mut self, g: &[usize]) -> Result<f64> {
        if let Some(&s) = self.inner_cache.get(g) {
            return Ok(s);
        }
        let s = inner_group_distance(self.ds, g)?;
        self.inner_cache.insert(g.to_vec(), s);
        Ok(s)
    }

    /// `partition_score` over sorted groups, via the caches.
    pub(crate) fn score(&mut self, g1: &[usize], g2: &[usize]) -> Result<f64> {
        let c1 = self.centroid(g1)?;
        let c2 = self.centroid(g2)?;
        let numerator = euclidean_distance(c1.view(), c2.view())?;
        let denominator = (self.inner(g1)? + self.inner(g2)?).max(self.eps);
        Ok(numerator / denominator)
    }

    pub(crate) fn partition(&mut self, g1: Vec<usize>, g2: Vec<usize>) -> Result<ClassPartition> {
        let score = self.score(&g1, &g2)?;
        let centroid1 = self.centroid(&g1)?;
        let centroid2 = self.centroid(&g2)?;
        Ok(ClassPartition {
            g1,
            g2,
            score,
            centroid1,
            centroid2,
        })
    }
}

fn validate_classes(ds: &Dataset, classes: &[usize]) -> Result<Vec<usize>> {
    check_group(ds, classes)?;
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != classes.len() {
        return Err(Error::InvalidArgument("duplicate class index".into()));
    }
    if sorted.len() < 2 {
        return Err(Error::InvalidArgument(
            "bipartition needs at least 2 classes".into(),
        ));
    }
    Ok(sorted)
}

fn sorted_insert(g: &[usize], c: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(g.len() + 1);
    let pos = g.partition_point(|&x| x < c);
    out.extend_from_slice(&g[..pos]);
    out.push(c);
    out.extend_from_slice(&g[pos..]);
    out
}

fn sorted_remove(g: &[usize], c: usize) -> Vec<usize> {
    g.iter().copied().filter(|&x| x != c).collect()
}

pub(crate) struct SffsTrace {
    pub partition: ClassPartition,
    /// Scores in acceptance order; strictly increasing.
    #[allow(dead_code)] // read by the search property tests
    pub accepted_scores: Vec<f64>,
}

/// Search driver shared by [`sffs_bipartition`] and the matrix builders.
pub(crate) fn sffs_search(ctx: &mut PartitionCtx<'_>, classes: &[usize]) -> Result<SffsTrace> {
    let classes = validate_classes(ctx.ds, classes)?;

    // First inclusion from the empty positive group: seed g1 with the class
    // whose singleton split scores best (ties keep the lowest index).
    let mut best: Option<(usize, f64)> = None;
    for &c in &classes {
        let rest = sorted_remove(&classes, c);
        let s = ctx.score(&[c], &rest)?;
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((c, s));
        }
    }
    let (seed_class, mut current) = best.expect("classes nonempty");
    let mut g1 = vec![seed_class];
    let mut g2 = sorted_remove(&classes, seed_class);
    let mut accepted = vec![current];

    loop {
        let mut improved = false;
        if g2.len() >= 2 {
            let mut inclusion: Option<(usize, f64)> = None;
            for &c in &g2 {
                let s = ctx.score(&sorted_insert(&g1, c), &sorted_remove(&g2, c))?;
                if inclusion.is_none_or(|(_, bs)| s > bs) {
                    inclusion = Some((c, s));
                }
            }
            if let Some((c, s)) = inclusion {
                if s > current + score_tolerance(current) {
                    g1 = sorted_insert(&g1, c);
                    g2 = sorted_remove(&g2, c);
                    current = s;
                    accepted.push(current);
                    improved = true;

                    // Floating step: keep excluding the best class to leave
                    // g1 while that strictly improves the score.
                    while g1.len() >= 2 {
                        let mut exclusion: Option<(usize, f64)> = None;
                        for &c in &g1 {
                            let s = ctx.score(&sorted_remove(&g1, c), &sorted_insert(&g2, c))?;
                            if exclusion.is_none_or(|(_, bs)| s > bs) {
                                exclusion = Some((c, s));
                            }
                        }
                        match exclusion {
                            Some((c, s)) if s > current + score_tolerance(current) => {
                                g1 = sorted_remove(&g1, c);
                                g2 = sorted_insert(&g2, c);
                                current = s;
                                accepted.push(current);
                            }
                            _ => break,
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    let partition = ctx.partition(g1, g2)?;
    Ok(SffsTrace {
        partition,
        accepted_scores: accepted,
    })
}

/// Sequential forward floating selection over single-class moves.
///
/// The result is a local optimum: no move of one class across the split
/// (keeping both sides nonempty) improves the score by more than the
/// acceptance tolerance.
pub fn sffs_bipartition(ds: &Dataset, classes: &[usize], eps: f64) -> Result<ClassPartition> {
    let mut ctx = PartitionCtx::new(ds, eps);
    Ok(sffs_search(&mut ctx, classes)?.partition)
}

/// Best bipartition by enumeration of all `2^(n-1) - 1` splits; ties broken
/// by lexicographically smallest `g1`. Limited to 20 classes.
pub fn exhaustive_bipartition(ds: &Dataset, classes: &[usize], eps: f64) -> Result<ClassPartition> {
    let classes = validate_classes(ds, classes)?;
    let n = classes.len();
    if n > 20 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration limited to 20 classes, got {n}"
        )));
    }
    let mut ctx = PartitionCtx::new(ds, eps);
    // The lexicographically smaller orientation of every split puts the
    // lowest class index in g1, so enumerate subsets containing classes[0].
    let mut best: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut g1 = vec![classes[0]];
        let mut g2 = Vec::new();
        for (bit, &c) in classes[1..].iter().enumerate() {
            if mask & (1 << bit) != 0 {
                g1.push(c);
            } else {
                g2.push(c);
            }
        }
        if g2.is_empty() {
            continue;
        }
        let s = ctx.score(&g1, &g2)?;
        let better = match &best {
            None => true,
            Some((bg1, _, bs)) => s > *bs || (s == *bs && g1 < *bg1),
        };
        if better {
            best = Some((g1, g2, s));
        }
    }
    let (g1, g2, _) = best.expect("at least one bipartition exists");
    ctx.partition(g1, g2)
}
