#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speclust::{CooMatrix, CsrMatrix, DupPolicy};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn csr_from(n: usize, t: &[(usize, usize, f64)]) -> CsrMatrix {
    CooMatrix::from_triplets(n, n, t)
        .unwrap()
        .canonicalize(DupPolicy::Sum)
        .unwrap()
        .to_csr()
        .unwrap()
}

/// Symmetric matrix with about `density · n²` stored entries drawn from [-1, 1].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CsrMatrix {
    let target = ((density * (n * n) as f64) as usize).max(1);
    let mut t = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    while t.len() + 2 <= target {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if !seen.insert((i.min(j), i.max(j))) {
            continue;
        }
        let v = rng.random_range(-1.0..1.0);
        t.push((i, j, v));
        if i != j {
            t.push((j, i, v));
        }
    }
    csr_from(n, &t)
}

/// Connected weighted graph: a random spanning tree plus extra random edges,
/// weights in (0.1, 1].
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> CsrMatrix {
    let mut edges = std::collections::BTreeMap::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i), rng.random_range(0.1..=1.0));
    }
    for _ in 0..extra {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            edges.insert((i.min(j), i.max(j)), rng.random_range(0.1..=1.0));
        }
    }
    let mut t = Vec::new();
    for (&(i, j), &w) in &edges {
        t.push((i, j, w));
        t.push((j, i, w));
    }
    csr_from(n, &t)
}

/// Block-diagonal similarity graph: `k` dense blocks with positive weights
/// and no edges between blocks. Returns the matrix and block labels.
pub fn block_diagonal(rng: &mut ChaCha8Rng, sizes: &[usize]) -> (CsrMatrix, Vec<usize>) {
    let n: usize = sizes.iter().sum();
    let mut labels = Vec::with_capacity(n);
    let mut t = Vec::new();
    let mut start = 0;
    for (b, &s) in sizes.iter().enumerate() {
        for i in start..start + s {
            labels.push(b);
            for j in i + 1..start + s {
                let w = rng.random_range(0.2..=1.0);
                t.push((i, j, w));
                t.push((j, i, w));
            }
        }
        start += s;
    }
    (csr_from(n, &t), labels)
}

pub fn to_nalgebra(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.n_rows(), a.n_cols(), |i, j| d[i][j])
}

/// Dense oracle: all eigenvalues in descending order with matching
/// eigenvectors (as columns).
pub fn oracle_eigen(a: &CsrMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let e = to_nalgebra(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..a.n_rows()).collect();
    order.sort_by(|&x, &y| e.eigenvalues[y].total_cmp(&e.eigenvalues[x]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.n_rows(), a.n_rows(), |i, j| e.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Dense eigenvalues of a possibly non-symmetric matrix with real spectrum,
/// descending.
pub fn oracle_real_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.complex_eigenvalues().iter().map(|c| c.re).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn residual(a: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let av = a.spmv(v).unwrap();
    av.iter().zip(v).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt()
}

/// `max |VᵀV − I|` over the columns of `v`.
pub fn orthonormality_defect(v: &speclust::DenseMatrix) -> f64 {
    let k = v.n_cols();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| v.column(j)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let dot: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Permutes nodes: new index of old node `i` is `perm[i]`.
pub fn permute(a: &CsrMatrix, perm: &[usize]) -> CsrMatrix {
    let t: Vec<_> = a.to_coo().triplets().map(|(i, j, v)| (perm[i], perm[j], v)).collect();
    csr_from(a.n_rows(), &t)
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
