//! Cyclic Jacobi eigenvalue iteration for small dense symmetric matrices.
//! Used for the projected Rayleigh–Ritz problem inside the Lanczos solver.

/// Eigen-decomposition of the symmetric `m×m` row-major matrix `a`.
///
/// Returns `(values, vectors)` where column `j` of the row-major `vectors`
/// (`vectors[i * m + j]`) is the unit eigenvector for `values[j]`. Values are
/// not sorted.
pub(crate) fn symmetric_eigen(a: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), m * m);
    let mut a = a.to_vec();
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    if m <= 1 {
        return (a, v);
    }

    for sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|p| (p + 1..m).map(move |q| (p, q)))
            .map(|(p, q)| a[p * m + q].abs())
            .sum();
        if off == 0.0 {
            break;
        }
        let threshold = if sweep < 3 {
            0.2 * off / (m * m) as f64
        } else {
            0.0
        };
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                let g = 100.0 * apq.abs();
                let (app, aqq) = (a[p * m + p], a[q * m + q]);
                // off-diagonal already below the precision of both diagonal entries
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * m + q] = 0.0;
                    a[q * m + p] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold {
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, m, p, q, c, s, t);
            }
        }
    }
    let values = (0..m).map(|i| a[i * m + i]).collect();
    (values, v)
}

#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut [f64], v: &mut [f64], m: usize, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let apq = a[p * m + q];
    a[p * m + p] -= t * apq;
    a[q * m + q] += t * apq;
    a[p * m + q] = 0.0;
    a[q * m + p] = 0.0;
    for r in 0..m {
        if r != p && r != q {
            let arp = a[r * m + p];
            let arq = a[r * m + q];
            let new_p = c * arp - s * arq;
            let new_q = s * arp + c * arq;
            a[r * m + p] = new_p;
            a[p * m + r] = new_p;
            a[r * m + q] = new_q;
            a[q * m + r] = new_q;
        }
    }
    for r in 0..m {
        let vrp = v[r * m + p];
        let vrq = v[r * m + q];
        v[r * m + p] = c * vrp - s * vrq;
        v[r * m + q] = s * vrp + c * vrq;
    }
}
