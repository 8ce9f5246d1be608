//! k-means with k-means++ seeding and Lloyd iterations.
//!
//! Point-to-centroid distances use the expansion
//! `‖v−c‖² = ‖v‖² + ‖c‖² − 2⟨v, c⟩`, which turns the distance matrix into one
//! matrix product plus two norm vectors.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::par::CHUNK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KmeansInit {
    #[default]
    KmeansPlusPlus,
    RandomPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub init: KmeansInit,
    /// Stop once an iteration changes at most this many labels.
    pub tol_changes: usize,
    /// Independent seeded runs; the lowest final SSE wins.
    pub n_init: usize,
}

impl KmeansConfig {
    pub fn new(k: usize) -> Self {
        KmeansConfig {
            k,
            max_iters: 300,
            seed: 0,
            init: KmeansInit::KmeansPlusPlus,
            tol_changes: 0,
            n_init: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidArgument(format!(
                "k-means needs 1 <= k <= n = {n}, got k = {}",
                self.k
            )));
        }
        if self.n_init == 0 {
            return Err(Error::InvalidArgument("n_init must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: Vec<usize>,
    /// k×d; the centroids the final labels were assigned against.
    pub centroids: DenseMatrix,
    pub sse: f64,
    pub iters_run: usize,
    /// SSE after the initial assignment and after every iteration.
    pub sse_history: Vec<f64>,
    /// Number of times an empty cluster was reseeded.
    pub reseeded: usize,
}

/// Relative size under which an expanded distance is recomputed directly.
const CANCELLATION: f64 = 1e-6;

/// `S[i][j] = ‖v_i − c_j‖²` via the norm expansion, clamped below at zero.
///
/// Entries where the expansion cancels almost completely (near-coincident
/// rows) are recomputed as a direct sum of squared differences.
pub fn pairwise_sq_dist(v: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    if v.n_cols() != c.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: v.n_cols(),
            found: c.n_cols(),
        });
    }
    let k = c.n_rows();
    let d = v.n_cols() as f64;
    let c_norm: Vec<f64> = (0..k).map(|j| sq_norm(c.row(j))).collect();
    let mut s = vec![0.0; v.n_rows() * k];
    if k > 0 {
        s.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            let vi = v.row(i);
            let v_norm = sq_norm(vi);
            for (j, out) in row.iter_mut().enumerate() {
                let cross: f64 = vi.iter().zip(c.row(j)).map(|(a, b)| a * b).sum();
                let scale = v_norm + c_norm[j];
                let e = v_norm + c_norm[j] - 2.0 * cross;
                // below this the expansion's rounding error can exceed 1e-9 relative
                *out = if e > CANCELLATION * (d + 2.0) * scale {
                    e
                } else {
                    sq_dist(vi, c.row(j))
                };
            }
        });
    }
    DenseMatrix::new(v.n_rows(), k, s)
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Row indices chosen by k-means++ seeding, in selection order.
pub fn kmeanspp_indices(v: &DenseMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = v.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-means++ needs 1 <= k <= n = {n}, got k = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(v.row(i), v.row(first))).collect();
    dist[first] = 0.0;

    while chosen.len() < k {
        // sequential sum keeps the sampling thread-independent
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 {
                    acc += d;
                    pick = Some(i);
                    if acc > u {
                        break;
                    }
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let c = v.row(next);
        dist.par_iter_mut()
            .with_min_len(CHUNK)
            .enumerate()
            .for_each(|(i, d)| *d = d.min(sq_dist(v.row(i), c)));
        dist[next] = 0.0;
    }
    Ok(chosen)
}

/// k-means++ seeding: first centroid uniform, each further one drawn with
/// probability proportional to its squared distance from the nearest
/// centroid chosen so far.
pub fn kmeanspp_init(v: &DenseMatrix, k: usize, seed: u64) -> Result<DenseMatrix> {
    Ok(v.select_rows(&kmeanspp_indices(v, k, seed)?))
}

/// `k` distinct rows drawn uniformly.
pub fn random_points_init(v: &DenseMatrix, k: usize, seed: u64) -> Result<DenseMatrix> {
    let n = v.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n = {n}, got k = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = sample(&mut rng, n, k).into_vec();
    Ok(v.select_rows(&idx))
}

/// Nearest centroid per point (ties to the lower index) and the distance to it.
fn assign(v: &DenseMatrix, c: &DenseMatrix) -> Result<(Vec<usize>, Vec<f64>)> {
    let s = pairwise_sq_dist(v, c)?;
    Ok(s.rows()
        .map(|row| {
            let mut best = 0;
            for (j, &d) in row.iter().enumerate().skip(1) {
                if d < row[best] {
                    best = j;
                }
            }
            (best, row[best])
        })
        .unzip())
}

/// Per-cluster means. Partial sums are formed over fixed blocks of points and
/// merged in block order. Empty clusters are moved onto the point farthest
/// from its current centroid.
fn update(v: &DenseMatrix, labels: &[usize], k: usize, dist: &[f64]) -> (DenseMatrix, usize) {
    let d = v.n_cols();
    let partials: Vec<(Vec<f64>, Vec<usize>)> = labels
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(b, chunk)| {
            let mut sums = vec![0.0; k * d];
            let mut counts = vec![0usize; k];
            for (off, &l) in chunk.iter().enumerate() {
                let row = v.row(b * CHUNK + off);
                counts[l] += 1;
                sums[l * d..(l + 1) * d].iter_mut().zip(row).for_each(|(s, x)| *s += x);
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (ps, pc) in partials {
        sums.iter_mut().zip(&ps).for_each(|(s, p)| *s += p);
        counts.iter_mut().zip(&pc).for_each(|(c, p)| *c += p);
    }

    let mut far = dist.to_vec();
    let mut reseeded = 0;
    let mut centroids = DenseMatrix::zeros(k, d);
    for j in 0..k {
        let out = centroids.row_mut(j);
        if counts[j] > 0 {
            let inv = counts[j] as f64;
            out.iter_mut()
                .zip(&sums[j * d..(j + 1) * d])
                .for_each(|(o, s)| *o = s / inv);
        } else {
            let mut p = 0;
            for (i, &x) in far.iter().enumerate() {
                if x > far[p] {
                    p = i;
                }
            }
            out.copy_from_slice(v.row(p));
            far[p] = 0.0;
            reseeded += 1;
        }
    }
    (centroids, reseeded)
}

/// Sum of squared distances from each point to its assigned centroid,
/// evaluated directly (not through the expansion).
pub fn sse(v: &DenseMatrix, labels: &[usize], c: &DenseMatrix) -> f64 {
    let partials: Vec<f64> = labels
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(b, chunk)| {
            chunk
                .iter()
                .enumerate()
                .map(|(off, &l)| sq_dist(v.row(b * CHUNK + off), c.row(l)))
                .sum()
        })
        .collect();
    partials.iter().sum()
}

/// Lloyd iterations from the given centroids.
///
/// The initial assignment is made against `init_c`; every iteration then
/// recomputes centroids as member means and reassigns. Iteration stops when
/// at most `tol_changes` labels change, or after `max_iters` iterations.
pub fn lloyd(v: &DenseMatrix, init_c: &DenseMatrix, cfg: &KmeansConfig) -> Result<Labeling> {
    let k = init_c.n_rows();
    if k != cfg.k {
        return Err(Error::DimensionMismatch {
            expected: cfg.k,
            found: k,
        });
    }
    if init_c.n_cols() != v.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: v.n_cols(),
            found: init_c.n_cols(),
        });
    }
    cfg.validate(v.n_rows())?;

    let mut centroids = init_c.clone();
    let (mut labels, mut dist) = assign(v, &centroids)?;
    let mut history = vec![sse(v, &labels, &centroids)];
    let mut iters = 0;
    let mut reseeded = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let (c, r) = update(v, &labels, k, &dist);
        centroids = c;
        reseeded += r;
        let (new_labels, new_dist) = assign(v, &centroids)?;
        let changes = labels.iter().zip(&new_labels).filter(|(a, b)| a != b).count();
        labels = new_labels;
        dist = new_dist;
        history.push(sse(v, &labels, &centroids));
        if changes <= cfg.tol_changes {
            break;
        }
    }
    Ok(Labeling {
        sse: *history.last().unwrap(),
        labels,
        centroids,
        iters_run: iters,
        sse_history: history,
        reseeded,
    })
}

/// Seed of run `r` out of `n_init`; run 0 uses `seed` itself.
pub fn run_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Seeding followed by Lloyd iterations, repeated `n_init` times with
/// derived seeds. Returns the run with the lowest final SSE, earliest on ties.
pub fn kmeans(v: &DenseMatrix, cfg: &KmeansConfig) -> Result<Labeling> {
    cfg.validate(v.n_rows())?;
    let mut best: Option<Labeling> = None;
    for r in 0..cfg.n_init {
        let seed = run_seed(cfg.seed, r);
        let init = match cfg.init {
            KmeansInit::KmeansPlusPlus => kmeanspp_init(v, cfg.k, seed)?,
            KmeansInit::RandomPoints => random_points_init(v, cfg.k, seed)?,
        };
        let l = lloyd(v, &init, cfg)?;
        if best.as_ref().is_none_or(|b| l.sse < b.sse) {
            best = Some(l);
        }
    }
    Ok(best.expect("n_init >= 1"))
}
