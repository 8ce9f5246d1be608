//! Partition quality: graph-cut objectives against a similarity matrix and
//! the adjusted Rand index between two labelings.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Assignment of `n` nodes to `k` parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&l) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!("label {l} out of range for k = {k}")));
        }
        Ok(Partition { labels, k })
    }

    /// `k` taken as one more than the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Partition { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

struct CutStats {
    /// `W(A_i, Ā_i)` per part.
    boundary: Vec<f64>,
    /// Degree sums per part, self-loops included.
    volume: Vec<f64>,
}

fn cut_stats(w: &CsrMatrix, p: &Partition) -> Result<CutStats> {
    if !w.is_square() {
        return Err(Error::NotSquare {
            n_rows: w.n_rows(),
            n_cols: w.n_cols(),
        });
    }
    if p.labels.len() != w.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: w.n_rows(),
            found: p.labels.len(),
        });
    }
    let mut boundary = vec![0.0; p.k];
    let mut volume = vec![0.0; p.k];
    for i in 0..w.n_rows() {
        let li = p.labels[i];
        let (cols, vals) = w.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            volume[li] += v;
            if p.labels[j] != li {
                boundary[li] += v;
            }
        }
    }
    Ok(CutStats { boundary, volume })
}

/// Total weight of edges joining different parts, each edge counted once.
pub fn cut(w: &CsrMatrix, p: &Partition) -> Result<f64> {
    let s = cut_stats(w, p)?;
    Ok(0.5 * s.boundary.iter().sum::<f64>())
}

/// `½ Σ W(A_i, Ā_i) / |A_i|`.
pub fn ratio_cut(w: &CsrMatrix, p: &Partition) -> Result<f64> {
    let s = cut_stats(w, p)?;
    let sizes = p.sizes();
    let mut total = 0.0;
    for (part, (&b, &size)) in s.boundary.iter().zip(&sizes).enumerate() {
        if size == 0 {
            return Err(Error::EmptyPart { part });
        }
        total += b / size as f64;
    }
    Ok(0.5 * total)
}

/// `½ Σ W(A_i, Ā_i) / vol(A_i)`.
pub fn ncut(w: &CsrMatrix, p: &Partition) -> Result<f64> {
    let s = cut_stats(w, p)?;
    let mut total = 0.0;
    for (part, (&b, &vol)) in s.boundary.iter().zip(&s.volume).enumerate() {
        if !(vol > 0.0) {
            return Err(Error::ZeroVolumePart { part });
        }
        total += b / vol;
    }
    Ok(0.5 * total)
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index. Label values are arbitrary identifiers.
///
/// When both labelings are trivial in the same way (one part each, or all
/// singletons) the index is undefined and 1.0 is returned.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
