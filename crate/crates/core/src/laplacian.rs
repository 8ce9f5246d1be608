//! Degree computation and the two normalizations of the similarity matrix:
//! the row-stochastic `D⁻¹W` and its symmetric similarity transform
//! `D^{-1/2} W D^{-1/2}`.
//!
//! Both share the same spectrum. If `u` is an eigenvector of the symmetric
//! form then `D^{-1/2} u` is an eigenvector of `D⁻¹W` for the same value.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Row sums of a similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    deg: Vec<f64>,
}

impl DegreeVector {
    pub fn new(deg: Vec<f64>) -> Self {
        DegreeVector { deg }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.deg
    }

    pub fn len(&self) -> usize {
        self.deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deg.is_empty()
    }

    pub fn isolated(&self) -> Vec<usize> {
        self.deg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_positive(&self, n: usize) -> Result<()> {
        if self.deg.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.deg.len(),
            });
        }
        match self.deg.iter().position(|&d| !(d > 0.0)) {
            Some(index) => Err(Error::ZeroDegree { index }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsolatedPolicy {
    #[default]
    Error,
    Remove,
}

/// Result of isolated-node handling: the (possibly reduced) matrix, its
/// degrees and the surviving original node indices.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub matrix: CsrMatrix,
    pub degrees: DegreeVector,
    /// `kept[new] = old`
    pub kept: Vec<usize>,
}

impl Reduced {
    /// `old -> new` map; `None` for removed nodes.
    pub fn old_to_new(&self, n_old: usize) -> Vec<Option<usize>> {
        let mut map = vec![None; n_old];
        for (new, &old) in self.kept.iter().enumerate() {
            map[old] = Some(new);
        }
        map
    }
}

/// `deg = W · 1`.
pub fn degrees(w: &CsrMatrix) -> Result<DegreeVector> {
    if !w.is_square() {
        return Err(Error::NotSquare {
            n_rows: w.n_rows(),
            n_cols: w.n_cols(),
        });
    }
    Ok(DegreeVector::new(w.spmv(&vec![1.0; w.n_cols()])?))
}

pub fn handle_isolated(
    w: &CsrMatrix,
    d: &DegreeVector,
    policy: IsolatedPolicy,
) -> Result<Reduced> {
    if d.len() != w.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: w.n_rows(),
            found: d.len(),
        });
    }
    let isolated = d.isolated();
    if isolated.is_empty() {
        return Ok(Reduced {
            matrix: w.clone(),
            degrees: d.clone(),
            kept: (0..w.n_rows()).collect(),
        });
    }
    if policy == IsolatedPolicy::Error {
        return Err(Error::IsolatedNode(isolated));
    }
    let kept: Vec<usize> = (0..w.n_rows()).filter(|&i| d.as_slice()[i] != 0.0).collect();
    let mut new_index = vec![usize::MAX; w.n_rows()];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old] = new;
    }
    let mut row_ptr = Vec::with_capacity(kept.len() + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for &old in &kept {
        let (cols, vs) = w.row(old);
        for (&c, &v) in cols.iter().zip(vs) {
            // a zero-degree node can still carry explicit zeros
            if new_index[c] != usize::MAX {
                col_idx.push(new_index[c]);
                vals.push(v);
            }
        }
        row_ptr.push(col_idx.len());
    }
    let matrix = CsrMatrix::from_parts_unchecked(kept.len(), kept.len(), row_ptr, col_idx, vals);
    let degrees = DegreeVector::new(kept.iter().map(|&i| d.as_slice()[i]).collect());
    Ok(Reduced {
        matrix,
        degrees,
        kept,
    })
}

/// `D⁻¹W`: each row divided by its degree, making the matrix row-stochastic.
pub fn row_scale(w: &CsrMatrix, d: &DegreeVector) -> Result<CsrMatrix> {
    d.check_positive(w.n_rows())?;
    let deg = d.as_slice();
    Ok(w.map_values(|i, _, v| v / deg[i]))
}

/// `D^{-1/2} W D^{-1/2}`.
pub fn sym_scale(w: &CsrMatrix, d: &DegreeVector) -> Result<CsrMatrix> {
    if !w.is_square() {
        return Err(Error::NotSquare {
            n_rows: w.n_rows(),
            n_cols: w.n_cols(),
        });
    }
    d.check_positive(w.n_rows())?;
    let deg = d.as_slice();
    // the product is commutative, so (i, j) and (j, i) get identical bits
    Ok(w.map_values(|i, j, v| v / (deg[i] * deg[j]).sqrt()))
}

/// Maps eigenvectors of `D^{-1/2} W D^{-1/2}` (columns of `u`) to
/// eigenvectors of `D⁻¹W`, each rescaled to unit 2-norm.
pub fn recover_row_eigvecs(u: &DenseMatrix, d: &DegreeVector) -> Result<DenseMatrix> {
    d.check_positive(u.n_rows())?;
    let (n, k) = (u.n_rows(), u.n_cols());
    let inv_sqrt: Vec<f64> = d.as_slice().iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut data = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            data[i * k + j] = u.get(i, j) * inv_sqrt[i];
        }
    }
    for j in 0..k {
        let norm = (0..n).map(|i| data[i * k + j].powi(2)).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                data[i * k + j] /= norm;
            }
        }
    }
    DenseMatrix::new(n, k, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CooMatrix;

    fn csr(n: usize, t: &[(usize, usize, f64)]) -> CsrMatrix {
        CooMatrix::from_triplets(n, n, t).unwrap().canonicalize(Default::default()).unwrap().to_csr().unwrap()
    }

    fn path3() -> CsrMatrix {
        csr(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)])
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degrees(&path3()).unwrap().as_slice(), &[1.0, 2.0, 1.0]);
        let pair = csr(3, &[(0, 1, 3.0), (1, 0, 3.0)]);
        assert_eq!(degrees(&pair).unwrap().as_slice(), &[3.0, 3.0, 0.0]);
        let rect = CooMatrix::empty(2, 3).to_csr().unwrap();
        assert!(matches!(degrees(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn isolated_handling() {
        let w = path3();
        let d = degrees(&w).unwrap();
        let r = handle_isolated(&w, &d, IsolatedPolicy::Error).unwrap();
        assert_eq!(r.kept, vec![0, 1, 2]);

        let w = csr(3, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let d = degrees(&w).unwrap();
        let r = handle_isolated(&w, &d, IsolatedPolicy::Remove).unwrap();
        assert_eq!(r.kept, vec![0, 1]);
        assert_eq!(r.matrix.n_rows(), 2);
        assert_eq!(r.matrix.nnz(), 2);
        assert_eq!(r.old_to_new(3), vec![Some(0), Some(1), None]);

        let w = csr(3, &[(1, 2, 1.0), (2, 1, 1.0)]);
        let d = degrees(&w).unwrap();
        assert!(matches!(
            handle_isolated(&w, &d, IsolatedPolicy::Error),
            Err(Error::IsolatedNode(v)) if v == vec![0]
        ));
    }

    #[test]
    fn row_scale_examples() {
        let w = path3();
        let p = row_scale(&w, &degrees(&w).unwrap()).unwrap();
        assert_eq!(
            p.to_dense(),
            vec![vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 1.0, 0.0]]
        );
        let pair = csr(2, &[(0, 1, 4.0), (1, 0, 4.0)]);
        assert_eq!(row_scale(&pair, &degrees(&pair).unwrap()).unwrap().vals(), &[1.0, 1.0]);
        let stoch = csr(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(row_scale(&stoch, &degrees(&stoch).unwrap()).unwrap(), stoch);
    }

    #[test]
    fn sym_scale_examples() {
        let w = path3();
        let s = sym_scale(&w, &degrees(&w).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let dense = s.to_dense();
        let expected = [[0.0, r, 0.0], [r, 0.0, r], [0.0, r, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((dense[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        assert!(s.is_symmetric());

        // 4-cycle is 2-regular
        let cyc = csr(
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 2, 1.0), (3, 0, 1.0), (0, 3, 1.0)],
        );
        let d = degrees(&cyc).unwrap();
        assert_eq!(sym_scale(&cyc, &d).unwrap(), row_scale(&cyc, &d).unwrap());

        let pair = csr(2, &[(0, 1, 2.5), (1, 0, 2.5)]);
        assert_eq!(sym_scale(&pair, &degrees(&pair).unwrap()).unwrap().vals(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_degree_rejected() {
        let w = csr(3, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let d = degrees(&w).unwrap();
        assert!(matches!(row_scale(&w, &d), Err(Error::ZeroDegree { index: 2 })));
        assert!(matches!(sym_scale(&w, &d), Err(Error::ZeroDegree { index: 2 })));
        let u = DenseMatrix::zeros(3, 1);
        assert!(matches!(recover_row_eigvecs(&u, &d), Err(Error::ZeroDegree { index: 2 })));
    }

    #[test]
    fn recover_path_perron_vector() {
        let d = DegreeVector::new(vec![1.0, 2.0, 1.0]);
        let s2 = 2f64.sqrt();
        let u = DenseMatrix::from_columns(3, &[vec![0.5, s2 / 2.0, 0.5]]).unwrap();
        let v = recover_row_eigvecs(&u, &d).unwrap();
        let c = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((v.get(i, 0) - c).abs() < 1e-15);
        }
        let empty = recover_row_eigvecs(&DenseMatrix::zeros(3, 0), &d).unwrap();
        assert_eq!((empty.n_rows(), empty.n_cols()), (3, 0));
    }

    #[test]
    fn recover_on_regular_graph_is_identity_up_to_sign() {
        let d = DegreeVector::new(vec![2.0; 4]);
        let u = DenseMatrix::from_columns(4, &[vec![0.5, -0.5, 0.5, -0.5]]).unwrap();
        let v = recover_row_eigvecs(&u, &d).unwrap();
        assert!((0..4).all(|i| (v.get(i, 0) - u.get(i, 0)).abs() < 1e-15));
    }
}
