//! Similarity-graph construction from data points.
//!
//! A graph is built in two steps: choose a sparsity pattern (an [`EdgeList`])
//! with one of the `build_edges_*` functions, then weight each edge with a
//! [`SimilarityMeasure`] via [`build_similarity`].

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::dense::PointMatrix;
use crate::error::{Error, Result};
use crate::sparse::{CooMatrix, DupPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    Cosine,
    CrossCorrelation,
    ExpDecay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityMeasure {
    kind: SimilarityKind,
    sigma: f64,
}

impl SimilarityMeasure {
    pub fn cosine() -> Self {
        SimilarityMeasure {
            kind: SimilarityKind::Cosine,
            sigma: 1.0,
        }
    }

    pub fn cross_correlation() -> Self {
        SimilarityMeasure {
            kind: SimilarityKind::CrossCorrelation,
            sigma: 1.0,
        }
    }

    /// Gaussian kernel `exp(-‖x−y‖² / (2σ²))`.
    pub fn exp_decay(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(SimilarityMeasure {
            kind: SimilarityKind::ExpDecay,
            sigma,
        })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// How negative similarities are turned into edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativePolicy {
    #[default]
    ClampZero,
    Abs,
    Keep,
}

impl NegativePolicy {
    fn apply(self, s: f64) -> f64 {
        match self {
            NegativePolicy::ClampZero => s.max(0.0),
            NegativePolicy::Abs => s.abs(),
            NegativePolicy::Keep => s,
        }
    }
}

/// Undirected sparsity pattern: unordered index pairs, no self-loops, no
/// repeated pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeList {
    pairs: Vec<(usize, usize)>,
}

impl EdgeList {
    /// Validates the pairs against a graph of `n` nodes.
    pub fn new(pairs: Vec<(usize, usize)>, n: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(i, j) in &pairs {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfBounds {
                    row: i,
                    col: j,
                    n_rows: n,
                    n_cols: n,
                });
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop ({i}, {i}) in edge list")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidArgument(format!("repeated edge ({i}, {j})")));
            }
        }
        Ok(EdgeList { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest node index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.pairs.iter().map(|&(i, j)| i.max(j)).max()
    }

    /// Unit-weight symmetric adjacency over `n` nodes.
    pub fn to_unweighted(&self, n: usize) -> Result<CooMatrix> {
        let mut t = Vec::with_capacity(2 * self.len());
        for &(i, j) in &self.pairs {
            t.push((i, j, 1.0));
            t.push((j, i, 1.0));
        }
        CooMatrix::from_triplets(n, n, &t)?.canonicalize(DupPolicy::Error)
    }
}

/// Centered/normalized view of the points for one measure. Computing the
/// per-point quantities once and the pairwise term from them keeps every
/// evaluation symmetric in its two arguments.
struct Prepared<'a> {
    measure: SimilarityMeasure,
    rows: Vec<&'a [f64]>,
    centered: Option<Vec<Vec<f64>>>,
    norms: Vec<f64>,
}

fn centered_norm_is_degenerate(centered: f64, raw: f64) -> bool {
    centered == 0.0 || centered <= 1e-12 * raw
}

impl<'a> Prepared<'a> {
    fn new(rows: Vec<&'a [f64]>, measure: SimilarityMeasure) -> Result<Self> {
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let (centered, norms) = match measure.kind {
            SimilarityKind::Cosine => {
                let norms: Vec<f64> = rows.iter().map(|r| norm(r)).collect();
                if let Some(index) = norms.iter().position(|&n| n == 0.0) {
                    return Err(Error::DegenerateVector { index });
                }
                (None, norms)
            }
            SimilarityKind::CrossCorrelation => {
                let centered: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| {
                        let mean = r.iter().sum::<f64>() / r.len() as f64;
                        r.iter().map(|v| v - mean).collect()
                    })
                    .collect();
                let norms: Vec<f64> = centered.iter().map(|c| norm(c)).collect();
                for (index, (&cn, r)) in norms.iter().zip(&rows).enumerate() {
                    if centered_norm_is_degenerate(cn, norm(r)) {
                        return Err(Error::DegenerateVector { index });
                    }
                }
                (Some(centered), norms)
            }
            SimilarityKind::ExpDecay => (None, Vec::new()),
        };
        Ok(Prepared {
            measure,
            rows,
            centered,
            norms,
        })
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        match self.measure.kind {
            SimilarityKind::Cosine => {
                (dot(self.rows[i], self.rows[j]) / (self.norms[i] * self.norms[j])).clamp(-1.0, 1.0)
            }
            SimilarityKind::CrossCorrelation => {
                let c = self.centered.as_ref().unwrap();
                (dot(&c[i], &c[j]) / (self.norms[i] * self.norms[j])).clamp(-1.0, 1.0)
            }
            SimilarityKind::ExpDecay => {
                let d2 = sq_dist(self.rows[i], self.rows[j]);
                let s = self.measure.sigma;
                (-d2 / (2.0 * s * s)).exp()
            }
        }
    }

    /// Ranking key: larger means more similar. For the Gaussian kernel the
    /// negated squared distance is used so that far points whose kernel
    /// value underflows to zero still rank correctly.
    fn rank_key(&self, i: usize, j: usize) -> f64 {
        match self.measure.kind {
            SimilarityKind::ExpDecay => -sq_dist(self.rows[i], self.rows[j]),
            _ => self.pair(i, j),
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Similarity between two vectors under measure `m`.
///
/// Cosine and cross-correlation lie in `[-1, 1]`; the Gaussian kernel in
/// `(0, 1]`. A zero vector (cosine) or constant vector (cross-correlation)
/// yields [`Error::DegenerateVector`] with index 0 or 1.
pub fn similarity(x: &[f64], y: &[f64], m: SimilarityMeasure) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("vectors must have dimension >= 1".into()));
    }
    Ok(Prepared::new(vec![x, y], m)?.pair(0, 1))
}

fn point_rows(x: &PointMatrix) -> Result<Vec<&[f64]>> {
    x.check_points()?;
    Ok(x.rows().collect())
}

/// All pairs within Euclidean distance `eps` (inclusive).
pub fn build_edges_eps(x: &PointMatrix, eps: f64) -> Result<EdgeList> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let rows = point_rows(x)?;
    let n = rows.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (i + 1..n)
                .filter(move |&j| sq_dist(rows[i], rows[j]).sqrt() <= eps)
                .map(move |j| (i, j))
        })
        .collect();
    Ok(EdgeList { pairs })
}

/// Union k-nearest-neighbour pattern: `(i, j)` is an edge when either point
/// is among the other's `knn` most similar. Ties at the cutoff go to the
/// lower index.
pub fn build_edges_knn(x: &PointMatrix, knn: usize, m: SimilarityMeasure) -> Result<EdgeList> {
    let rows = point_rows(x)?;
    let n = rows.len();
    if knn == 0 || knn >= n {
        return Err(Error::InvalidArgument(format!(
            "knn must satisfy 1 <= knn < n = {n}, got {knn}"
        )));
    }
    let prep = Prepared::new(rows, m)?;
    let neighbours: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (prep.rank_key(i, j), j)).collect();
            cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            cand.truncate(knn);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let mut set = BTreeSet::new();
    for (i, nb) in neighbours.iter().enumerate() {
        for &j in nb {
            set.insert((i.min(j), i.max(j)));
        }
    }
    Ok(EdgeList {
        pairs: set.into_iter().collect(),
    })
}

/// All pairs whose similarity is strictly above `lambda`.
pub fn build_edges_threshold(
    x: &PointMatrix,
    lambda: f64,
    m: SimilarityMeasure,
) -> Result<EdgeList> {
    let rows = point_rows(x)?;
    let n = rows.len();
    let prep = Prepared::new(rows, m)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let prep = &prep;
            (i + 1..n)
                .filter(move |&j| prep.pair(i, j) > lambda)
                .map(move |j| (i, j))
        })
        .collect();
    Ok(EdgeList { pairs })
}

/// Weights every edge of `e` and returns the symmetric n×n similarity
/// matrix in canonical COO order. No diagonal entries are produced.
pub fn build_similarity(
    x: &PointMatrix,
    e: &EdgeList,
    m: SimilarityMeasure,
    negative_policy: NegativePolicy,
) -> Result<CooMatrix> {
    let rows = point_rows(x)?;
    let n = rows.len();
    if let Some(mx) = e.max_index() {
        if mx >= n {
            return Err(Error::IndexOutOfBounds {
                row: mx,
                col: mx,
                n_rows: n,
                n_cols: n,
            });
        }
    }
    let prep = Prepared::new(rows, m)?;
    let weights: Vec<f64> = e
        .pairs
        .par_iter()
        .map(|&(i, j)| negative_policy.apply(prep.pair(i, j)))
        .collect();
    let mut r = Vec::with_capacity(2 * e.len());
    let mut c = Vec::with_capacity(2 * e.len());
    let mut v = Vec::with_capacity(2 * e.len());
    for (&(i, j), &w) in e.pairs.iter().zip(&weights) {
        r.extend([i, j]);
        c.extend([j, i]);
        v.extend([w, w]);
    }
    CooMatrix::new(n, n, r, c, v)?.canonicalize(DupPolicy::Error)
}
