//! Reductions whose floating-point result does not depend on the number of
//! worker threads.
//!
//! Work is split into fixed-size chunks; each chunk is reduced sequentially
//! and the per-chunk partials are combined left to right. Chunk boundaries
//! depend only on the input length, so the summation order is fixed.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 4096;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return serial_dot(a, b);
    }
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| serial_dot(x, y))
        .collect();
    partials.iter().sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn serial_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y -= alpha * x`
pub(crate) fn axpy_neg(alpha: f64, x: &[f64], y: &mut [f64]) {
    if y.len() <= CHUNK {
        y.iter_mut().zip(x).for_each(|(yi, xi)| *yi -= alpha * xi);
    } else {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi -= alpha * xi));
    }
}

pub(crate) fn scale(alpha: f64, y: &mut [f64]) {
    y.par_iter_mut().with_min_len(CHUNK).for_each(|v| *v *= alpha);
}
