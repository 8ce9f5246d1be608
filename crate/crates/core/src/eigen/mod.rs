//! Top-k eigenpairs of a symmetric operator by thick-restart Lanczos.
//!
//! [`RciSession`] is the reverse-communication core; [`eigensolve`] drives
//! it with a CSR matrix as the operator.

mod jacobi;
mod rci;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rci::{RciSession, RciState};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_RESTARTS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Number of wanted (largest algebraic) eigenpairs.
    pub k: usize,
    /// Subspace dimension; `None` picks `min(n, max(2k, k + 8))`.
    pub m: Option<usize>,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl LanczosConfig {
    pub fn new(k: usize) -> Self {
        LanczosConfig {
            k,
            m: None,
            tol: DEFAULT_TOL,
            max_restarts: DEFAULT_MAX_RESTARTS,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_subspace(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn default_subspace(k: usize, n: usize) -> usize {
        n.min((2 * k).max(k + 8))
    }

    /// Subspace dimension for an operator of size `n`, after validation.
    pub fn resolve_m(&self, n: usize) -> Result<usize> {
        if self.k == 0 {
            return Err(Error::BadConfig("k must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::BadConfig(format!("tol must be positive, got {}", self.tol)));
        }
        let m = self.m.unwrap_or_else(|| Self::default_subspace(self.k, n));
        if self.k >= m {
            return Err(Error::BadConfig(format!("need k < m, got k = {}, m = {m}", self.k)));
        }
        if m > n {
            return Err(Error::BadConfig(format!("need m <= n, got m = {m}, n = {n}")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub restarts: usize,
    pub matvecs: usize,
    pub breakdowns: usize,
    pub verifications: usize,
}

/// Converged eigenpairs, largest value first.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    /// n×k, column `j` pairs with `values[j]`; unit 2-norm columns.
    pub vectors: DenseMatrix,
    /// `‖A v_j − λ_j v_j‖₂` measured by explicit multiplication.
    pub residuals: Vec<f64>,
    pub stats: SolveStats,
}

impl EigenBasis {
    pub(crate) fn from_columns(
        n: usize,
        values: Vec<f64>,
        columns: &[Vec<f64>],
        residuals: Vec<f64>,
        stats: SolveStats,
    ) -> Result<Self> {
        Ok(EigenBasis {
            values,
            vectors: DenseMatrix::from_columns(n, columns)?,
            residuals,
            stats,
        })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

/// Index of the first component carrying at least a millionth of the
/// vector's largest magnitude.
fn first_significant(v: &[f64]) -> usize {
    let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter().position(|x| x.abs() >= 1e-6 * big).unwrap_or(0)
}

/// Canonical ordering and signs: descending value, runs of tied values
/// ordered by first significant component, each vector's first significant
/// component made positive.
pub(crate) fn finalize_pairs(
    values: Vec<f64>,
    mut vectors: Vec<Vec<f64>>,
    tie: impl Fn(f64, f64) -> bool,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    for v in vectors.iter_mut() {
        let p = first_significant(v);
        if v.get(p).is_some_and(|&x| x < 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && tie(values[order[end - 1]], values[order[end]]) {
            end += 1;
        }
        order[start..end].sort_by_key(|&i| (first_significant(&vectors[i]), i));
        start = end;
    }
    let vals = order.iter().map(|&i| values[i]).collect();
    let mut slots: Vec<Option<Vec<f64>>> = vectors.into_iter().map(Some).collect();
    let vecs = order.iter().map(|&i| slots[i].take().unwrap()).collect();
    (vals, vecs)
}

/// Randomized symmetry probe: `|xᵀAy − yᵀAx| ≤ 1e-10 · ‖A‖_F ‖x‖ ‖y‖` for a
/// few random pairs.
pub fn check_symmetric(a: &CsrMatrix, seed: u64) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let fro = a.frobenius_norm();
    for _ in 0..3 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax = a.spmv(&x)?;
        let ay = a.spmv(&y)?;
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(s, t)| s * t).sum::<f64>();
        let defect = (dot(&y, &ax) - dot(&x, &ay)).abs();
        let scale = fro * dot(&x, &x).sqrt() * dot(&y, &y).sqrt();
        if defect > 1e-10 * scale {
            return Err(Error::NotSymmetric { defect, scale });
        }
    }
    Ok(())
}

/// Largest-`k` eigenpairs of the symmetric matrix `a`.
///
/// Runs an [`RciSession`] with `a` as the operator. When `k` equals the
/// matrix dimension no Krylov subspace can satisfy `k < m`, so the full
/// spectrum is computed densely instead.
pub fn eigensolve(a: &CsrMatrix, cfg: &LanczosConfig) -> Result<EigenBasis> {
    check_symmetric(a, cfg.seed)?;
    let n = a.n_rows();
    if cfg.k == n && cfg.k > 0 {
        return dense_eigensolve(a, cfg);
    }
    let mut session = RciSession::new(n, *cfg)?;
    while session.state() == RciState::NeedMatvec {
        let x = session.in_slot().to_vec();
        a.spmv_into(&x, session.out_slot_mut())?;
        session.advance()?;
    }
    session.extract(|x, y| {
        a.spmv_into(x, y).expect("dimensions fixed by the session");
    })
}

fn dense_eigensolve(a: &CsrMatrix, cfg: &LanczosConfig) -> Result<EigenBasis> {
    let n = a.n_rows();
    let flat: Vec<f64> = a.to_dense().concat();
    let (values, vecs) = jacobi::symmetric_eigen(&flat, n);
    let columns: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| vecs[i * n + j]).collect()).collect();
    let tie = |x: f64, y: f64| (x - y).abs() <= cfg.tol * x.abs().max(y.abs()).max(1.0);
    let (values, columns) = finalize_pairs(values, columns, tie);
    let residuals = values
        .iter()
        .zip(&columns)
        .map(|(&lambda, v)| {
            let av = a.spmv(v)?;
            Ok(av.iter().zip(v).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    EigenBasis::from_columns(n, values, &columns, residuals, SolveStats::default())
}
