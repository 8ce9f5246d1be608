mod common;

use common::*;
use proptest::prelude::*;
use speclust::laplacian::{
    degrees, handle_isolated, recover_row_eigvecs, row_scale, sym_scale, IsolatedPolicy,
};
use speclust::DenseMatrix;

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn row_scale_is_row_stochastic(seed in any::<u64>(), n in 2usize..=64) {
        let w = random_connected(&mut rng(seed), n, 2 * n);
        let p = row_scale(&w, &degrees(&w).unwrap()).unwrap();
        for (i, s) in p.spmv(&vec![1.0; n]).unwrap().iter().enumerate() {
            prop_assert!((s - 1.0).abs() <= 1e-12, "row {} sums to {}", i, s);
        }
    }

    #[test]
    fn sym_scale_is_symmetric_with_spectrum_in_unit_interval(seed in any::<u64>(), n in 2usize..=64) {
        let w = random_connected(&mut rng(seed), n, n);
        let s = sym_scale(&w, &degrees(&w).unwrap()).unwrap();
        for i in 0..n {
            let (cols, vals) = s.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                prop_assert!((s.get(j, i).unwrap() - v).abs() <= 1e-14);
            }
        }
        let (values, _) = oracle_eigen(&s);
        prop_assert!((values[0] - 1.0).abs() <= 1e-10);
        prop_assert!(values.iter().all(|&l| (-1.0 - 1e-10..=1.0 + 1e-10).contains(&l)));
    }

    #[test]
    fn row_and_sym_scaling_share_a_spectrum(seed in any::<u64>(), n in 2usize..=64) {
        let w = random_connected(&mut rng(seed), n, n);
        let d = degrees(&w).unwrap();
        let (sym, _) = oracle_eigen(&sym_scale(&w, &d).unwrap());
        let row = oracle_real_eigenvalues(&to_nalgebra(&row_scale(&w, &d).unwrap()));
        for (a, b) in sym.iter().zip(&row) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn recovered_vectors_are_eigenvectors_of_the_random_walk(seed in any::<u64>(), n in 3usize..=48) {
        let w = random_connected(&mut rng(seed), n, n);
        let d = degrees(&w).unwrap();
        let (values, vectors) = oracle_eigen(&sym_scale(&w, &d).unwrap());
        let k = n.min(4);
        let cols: Vec<Vec<f64>> = (0..k).map(|c| vectors.column(c).iter().copied().collect()).collect();
        let v = recover_row_eigvecs(&DenseMatrix::from_columns(n, &cols).unwrap(), &d).unwrap();
        let p = row_scale(&w, &d).unwrap();
        for j in 0..k {
            let col = v.column(j);
            prop_assert!((norm(&col) - 1.0).abs() <= 1e-12);
            prop_assert!(residual(&p, values[j], &col) <= 1e-8);
        }
        // the Perron vector of a connected graph is constant
        let c0 = v.column(0);
        prop_assert!(c0.iter().all(|x| (x.abs() - 1.0 / (n as f64).sqrt()).abs() <= 1e-8));
    }
}

#[test]
fn isolated_nodes_are_reported_or_removed() {
    // nodes 1 and 4 have no edges; node 4 carries an explicit zero
    let w = csr_from(
        5,
        &[(0, 2, 1.0), (2, 0, 1.0), (2, 3, 2.0), (3, 2, 2.0), (4, 0, 0.0), (0, 4, 0.0)],
    );
    let d = degrees(&w).unwrap();
    assert_eq!(d.isolated(), vec![1, 4]);
    match handle_isolated(&w, &d, IsolatedPolicy::Error) {
        Err(speclust::Error::IsolatedNode(v)) => assert_eq!(v, vec![1, 4]),
        other => panic!("expected IsolatedNode, got {other:?}"),
    }
    let r = handle_isolated(&w, &d, IsolatedPolicy::Remove).unwrap();
    assert_eq!(r.kept, vec![0, 2, 3]);
    assert_eq!(r.degrees.as_slice(), &[1.0, 3.0, 2.0]);
    r.matrix.validate().unwrap();
    assert!(r.matrix.is_symmetric());
    assert_eq!(r.old_to_new(5), vec![Some(0), None, Some(1), Some(2), None]);
    assert!(sym_scale(&w, &d).is_err());
}
