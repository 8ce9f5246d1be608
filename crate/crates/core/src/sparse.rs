//! Coordinate (COO) and compressed-sparse-row (CSR) storage.
//!
//! Both types are immutable once built. Constructors validate every
//! structural invariant, so a value of either type is always well formed.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// What to do with repeated `(row, col)` pairs during canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DupPolicy {
    #[default]
    Sum,
    Error,
}

/// Sparse matrix as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CooMatrix {
    /// Builds a COO matrix in arbitrary entry order. Duplicates are allowed
    /// until [`CooMatrix::canonicalize`] is called.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        rows: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if rows.len() != vals.len() {
            return Err(Error::DimensionMismatch {
                expected: vals.len(),
                found: rows.len(),
            });
        }
        if cols.len() != vals.len() {
            return Err(Error::DimensionMismatch {
                expected: vals.len(),
                found: cols.len(),
            });
        }
        for ((&r, &c), &v) in rows.iter().zip(&cols).zip(&vals) {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("entry ({r}, {c}) = {v}")));
            }
        }
        Ok(CooMatrix {
            n_rows,
            n_cols,
            rows,
            cols,
            vals,
        })
    }

    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let rows = triplets.iter().map(|t| t.0).collect();
        let cols = triplets.iter().map(|t| t.1).collect();
        let vals = triplets.iter().map(|t| t.2).collect();
        Self::new(n_rows, n_cols, rows, cols, vals)
    }

    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.vals)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// True when entries are sorted by `(row, col)` with no repeats.
    pub fn is_canonical(&self) -> bool {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(self.rows.iter().zip(&self.cols).skip(1))
            .all(|(a, b)| a < b)
    }

    /// Sorts entries by `(row, col)` and resolves duplicates per `policy`.
    /// Explicit zeros are kept.
    pub fn canonicalize(&self, policy: DupPolicy) -> Result<CooMatrix> {
        let mut order: Vec<usize> = (0..self.nnz()).collect();
        // stable sort keeps duplicate summation in input order
        order.sort_by_key(|&e| (self.rows[e], self.cols[e]));

        let mut rows = Vec::with_capacity(order.len());
        let mut cols = Vec::with_capacity(order.len());
        let mut vals: Vec<f64> = Vec::with_capacity(order.len());
        for e in order {
            let (r, c, v) = (self.rows[e], self.cols[e], self.vals[e]);
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                match policy {
                    DupPolicy::Sum => *vals.last_mut().unwrap() += v,
                    DupPolicy::Error => return Err(Error::DuplicateEntry { row: r, col: c }),
                }
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("duplicate sum overflowed to {v}")));
        }
        Ok(CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            rows,
            cols,
            vals,
        })
    }

    /// Compresses the row indices. The matrix must already be canonical.
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        if !self.is_canonical() {
            return Err(Error::InvalidStructure(
                "COO matrix must be canonicalized before conversion".into(),
            ));
        }
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        for &r in &self.rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx: self.cols.clone(),
            vals: self.vals.clone(),
        })
    }
}

/// Compressed-sparse-row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        let m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Self {
        let m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        };
        debug_assert!(m.validate().is_ok());
        m
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Checks every structural invariant of the CSR layout.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStructure(msg));
        if self.row_ptr.len() != self.n_rows + 1 {
            return bad(format!(
                "row_ptr has length {}, expected {}",
                self.row_ptr.len(),
                self.n_rows + 1
            ));
        }
        if self.row_ptr[0] != 0 {
            return bad("row_ptr[0] must be 0".into());
        }
        if self.col_idx.len() != self.vals.len() {
            return bad("col_idx and vals lengths differ".into());
        }
        if self.row_ptr[self.n_rows] != self.vals.len() {
            return bad(format!(
                "row_ptr[n_rows] = {} but nnz = {}",
                self.row_ptr[self.n_rows],
                self.vals.len()
            ));
        }
        for i in 0..self.n_rows {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            if start > end {
                return bad(format!("row_ptr decreases at row {i}"));
            }
            let cols = &self.col_idx[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
                return Err(Error::IndexOutOfBounds {
                    row: i,
                    col: c,
                    n_rows: self.n_rows,
                    n_cols: self.n_cols,
                });
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns not strictly increasing in row {i}"));
            }
        }
        if let Some(v) = self.vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("CSR value {v}")));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.vals[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut rows = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            rows.extend(std::iter::repeat_n(i, self.row_ptr[i + 1] - self.row_ptr[i]));
        }
        CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            rows,
            cols: self.col_idx.clone(),
            vals: self.vals.clone(),
        }
    }

    /// Row-major dense copy. Meant for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        d
    }

    /// Exact structural and value symmetry.
    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (0..self.n_rows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| self.get(j, i).is_some_and(|w| w.to_bits() == v.to_bits()))
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `y = A x`
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer. Each output element is a
    /// sequential sum over its row, so the result does not depend on how
    /// rows are distributed across threads.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                found: y.len(),
            });
        }
        y.par_iter_mut()
            .with_min_len(256)
            .enumerate()
            .for_each(|(i, yi)| {
                let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
                *yi = self.col_idx[s..e]
                    .iter()
                    .zip(&self.vals[s..e])
                    .map(|(&c, &v)| v * x[c])
                    .sum();
            });
        Ok(())
    }

    /// Same sparsity pattern with values replaced by `f(row, col, value)`.
    pub(crate) fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64 + Sync) -> CsrMatrix {
        let mut vals = vec![0.0; self.nnz()];
        vals.par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(e, v)| {
                let i = self.row_ptr.partition_point(|&p| p <= e) - 1;
                *v = f(i, self.col_idx[e], self.vals[e]);
            });
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals,
        }
    }
}

/// Sorts and merges duplicates per `policy`.
pub fn coo_canonicalize(m: &CooMatrix, policy: DupPolicy) -> Result<CooMatrix> {
    m.canonicalize(policy)
}

pub fn coo_to_csr(m: &CooMatrix) -> Result<CsrMatrix> {
    m.to_csr()
}

pub fn csr_to_coo(m: &CsrMatrix) -> CooMatrix {
    m.to_coo()
}

pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.spmv(x)
}
