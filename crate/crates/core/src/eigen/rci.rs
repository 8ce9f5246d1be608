//! Reverse-communication Lanczos session.
//!
//! The session never touches the operator. Whenever it needs `A·v` it
//! stops in [`RciState::NeedMatvec`] with `v` in [`RciSession::in_slot`];
//! the caller writes the product into [`RciSession::out_slot_mut`] and calls
//! [`RciSession::advance`]:
//!
//! ```
//! use speclust::eigen::{LanczosConfig, RciSession, RciState};
//!
//! let diag = [4.0, 3.0, 2.0, 1.0, 0.5, 0.25];
//! let mut s = RciSession::new(diag.len(), LanczosConfig::new(2)).unwrap();
//! while s.state() == RciState::NeedMatvec {
//!     let x = s.in_slot().to_vec();
//!     for (o, (xi, d)) in s.out_slot_mut().iter_mut().zip(x.iter().zip(&diag)) {
//!         *o = d * xi;
//!     }
//!     s.advance().unwrap();
//! }
//! let basis = s
//!     .extract(|x, y| y.iter_mut().zip(x.iter().zip(&diag)).for_each(|(o, (xi, d))| *o = d * xi))
//!     .unwrap();
//! assert!((basis.values[0] - 4.0).abs() < 1e-10);
//! ```
//!
//! Restarts are thick: the leading Ritz vectors are kept and the Lanczos
//! process continues from the residual direction, orthogonal to them. Every
//! new direction is reorthogonalized against the whole basis (two
//! Gram–Schmidt passes), and the projected matrix is assembled from those
//! coefficients. Once the wanted pairs pass the residual test, one more
//! fill is run from a fresh random direction orthogonal to them; a Krylov
//! space grown from a single start vector cannot see a second copy of a
//! repeated eigenvalue, and this pass is what exposes such copies. The
//! session only reports convergence after a pass in which the wanted values
//! did not move.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::jacobi::symmetric_eigen;
use super::{finalize_pairs, EigenBasis, LanczosConfig, SolveStats};
use crate::error::{Error, Result};
use crate::par;

/// `β ≤ BREAKDOWN · ‖A‖` means the new direction lies in the current basis.
const BREAKDOWN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RciState {
    NeedMatvec,
    Converged,
    Failed,
}

#[derive(Debug, Clone)]
pub struct RciSession {
    n: usize,
    k: usize,
    m: usize,
    tol: f64,
    max_restarts: usize,
    rng: ChaCha8Rng,
    state: RciState,
    basis: Vec<Vec<f64>>,
    /// Projected matrix `Vᵀ A V`, m×m row-major.
    proj: Vec<f64>,
    in_slot: Vec<f64>,
    out_slot: Vec<f64>,
    anorm: f64,
    /// Wanted values at the start of a verification pass.
    verifying: Option<Vec<f64>>,
    stats: SolveStats,
    history: Vec<f64>,
    value_history: Vec<Vec<f64>>,
    residual_estimates: Vec<f64>,
    ritz: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

struct RitzPairs {
    /// Indices into the Jacobi output, by descending value.
    order: Vec<usize>,
    values: Vec<f64>,
    vectors: Vec<f64>,
}

impl RciSession {
    pub fn new(n: usize, cfg: LanczosConfig) -> Result<Self> {
        let m = cfg.resolve_m(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut v0 = random_vector(&mut rng, n);
        let nrm = par::norm(&v0);
        par::scale(1.0 / nrm, &mut v0);
        Ok(RciSession {
            n,
            k: cfg.k,
            m,
            tol: cfg.tol,
            max_restarts: cfg.max_restarts,
            rng,
            state: RciState::NeedMatvec,
            in_slot: v0.clone(),
            basis: vec![v0],
            proj: vec![0.0; m * m],
            out_slot: vec![0.0; n],
            anorm: 0.0,
            verifying: None,
            stats: SolveStats::default(),
            history: Vec::new(),
            value_history: Vec::new(),
            residual_estimates: Vec::new(),
            ritz: None,
        })
    }

    pub fn state(&self) -> RciState {
        self.state
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn subspace_dim(&self) -> usize {
        self.m
    }

    /// The vector the caller must multiply by the operator.
    pub fn in_slot(&self) -> &[f64] {
        &self.in_slot
    }

    /// Where the caller writes `A · in_slot` before calling `advance`.
    pub fn out_slot_mut(&mut self) -> &mut [f64] {
        &mut self.out_slot
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Largest wanted-pair residual estimate after each regular subspace
    /// fill (verification passes are not recorded).
    pub fn residual_history(&self) -> &[f64] {
        &self.history
    }

    /// Wanted Ritz values recorded alongside `residual_history`. Each entry
    /// dominates the previous one elementwise: the kept Ritz vectors stay in
    /// the next subspace.
    pub fn value_history(&self) -> &[Vec<f64>] {
        &self.value_history
    }

    /// Residual estimates of the wanted pairs from the latest Rayleigh–Ritz step.
    pub fn residual_estimates(&self) -> &[f64] {
        &self.residual_estimates
    }

    /// Consumes `out_slot` (the operator applied to `in_slot`) and moves the
    /// iteration forward by one basis vector.
    pub fn advance(&mut self) -> Result<RciState> {
        match self.state {
            RciState::Converged => return Ok(RciState::Converged),
            RciState::Failed => {
                return Err(Error::MaxRestartsExceeded {
                    restarts: self.stats.restarts,
                    residuals: self.residual_estimates.clone(),
                })
            }
            RciState::NeedMatvec => {}
        }
        if let Some(v) = self.out_slot.iter().find(|v| !v.is_finite()) {
            self.state = RciState::Failed;
            return Err(Error::NonFinite(format!("operator output contains {v}")));
        }
        self.stats.matvecs += 1;

        let mut w = std::mem::replace(&mut self.out_slot, vec![0.0; self.n]);
        self.anorm = self.anorm.max(par::norm(&w));
        let j = self.basis.len() - 1;
        let h = orthogonalize(&self.basis, &mut w);
        let m = self.m;
        for (i, &hi) in h.iter().enumerate() {
            self.proj[i * m + j] = hi;
            self.proj[j * m + i] = hi;
        }
        let beta = par::norm(&w);
        let breakdown = beta <= BREAKDOWN * self.anorm;

        if self.basis.len() < m {
            let next = if breakdown {
                self.stats.breakdowns += 1;
                self.random_direction()?
            } else {
                par::scale(1.0 / beta, &mut w);
                w
            };
            self.push(next);
            return Ok(self.state);
        }

        let ritz = self.rayleigh_ritz();
        let k = self.k;
        let estimates: Vec<f64> = ritz.order[..k]
            .iter()
            .map(|&c| beta * ritz.vectors[(m - 1) * m + c].abs())
            .collect();
        let converged = estimates
            .iter()
            .zip(&ritz.values)
            .all(|(&r, &theta)| r <= self.tol * theta.abs().max(1.0));
        let max_est = estimates.iter().cloned().fold(0.0, f64::max);
        self.residual_estimates = estimates;

        if converged {
            let wanted = &ritz.values[..k];
            let settled = match &self.verifying {
                Some(prev) => prev.iter().zip(wanted).all(|(&p, &t)| {
                    (t - p).abs() <= 10.0 * self.tol * t.abs().max(1.0)
                }),
                // the basis already spans the whole space
                None => m == self.n,
            };
            if settled {
                let vectors = self.ritz_vectors(&ritz, k);
                self.ritz = Some((wanted.to_vec(), vectors));
                self.state = RciState::Converged;
                return Ok(self.state);
            }
            if self.stats.verifications >= self.max_restarts {
                self.state = RciState::Failed;
                return Err(Error::MaxRestartsExceeded {
                    restarts: self.stats.restarts,
                    residuals: self.residual_estimates.clone(),
                });
            }
            self.verifying = Some(wanted.to_vec());
            self.stats.verifications += 1;
            self.thick_restart(&ritz, k, None)?;
            return Ok(self.state);
        }

        if self.verifying.take().is_none() {
            self.history.push(max_est);
            self.value_history.push(ritz.values[..k].to_vec());
        }
        if self.stats.restarts >= self.max_restarts {
            self.state = RciState::Failed;
            return Err(Error::MaxRestartsExceeded {
                restarts: self.stats.restarts,
                residuals: self.residual_estimates.clone(),
            });
        }
        self.stats.restarts += 1;
        let keep = (k + (m - k) / 2).min(m - 1);
        let residual = (!breakdown).then(|| {
            par::scale(1.0 / beta, &mut w);
            w
        });
        self.thick_restart(&ritz, keep, residual)?;
        Ok(self.state)
    }

    /// Eigenpairs sorted by descending value. `apply` computes `y = A x` and
    /// is called once per pair to measure the true residual.
    pub fn extract(&self, mut apply: impl FnMut(&[f64], &mut [f64])) -> Result<EigenBasis> {
        let (values, vectors) = match (&self.state, &self.ritz) {
            (RciState::Converged, Some(r)) => r.clone(),
            _ => return Err(Error::NotConverged),
        };
        let tie = |a: f64, b: f64| (a - b).abs() <= self.tol * a.abs().max(b.abs()).max(1.0);
        let (values, vectors) = finalize_pairs(values, vectors, tie);
        let mut av = vec![0.0; self.n];
        let residuals = values
            .iter()
            .zip(&vectors)
            .map(|(&lambda, v)| {
                apply(v, &mut av);
                av.iter()
                    .zip(v)
                    .map(|(a, x)| (a - lambda * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        EigenBasis::from_columns(self.n, values, &vectors, residuals, self.stats)
    }

    fn push(&mut self, v: Vec<f64>) {
        self.in_slot.copy_from_slice(&v);
        self.basis.push(v);
    }

    fn rayleigh_ritz(&self) -> RitzPairs {
        let m = self.m;
        let (values, vectors) = symmetric_eigen(&self.proj, m);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        RitzPairs {
            values: order.iter().map(|&c| values[c]).collect(),
            order,
            vectors,
        }
    }

    /// The leading `count` Ritz vectors `V s_i`.
    fn ritz_vectors(&self, ritz: &RitzPairs, count: usize) -> Vec<Vec<f64>> {
        let m = self.m;
        let coeffs: Vec<Vec<f64>> = ritz.order[..count]
            .iter()
            .map(|&c| (0..m).map(|r| ritz.vectors[r * m + c]).collect())
            .collect();
        let basis = &self.basis;
        coeffs
            .par_iter()
            .map(|s| {
                let mut y = vec![0.0; self.n];
                y.par_chunks_mut(par::CHUNK).enumerate().for_each(|(ci, chunk)| {
                    let off = ci * par::CHUNK;
                    for (p, yp) in chunk.iter_mut().enumerate() {
                        *yp = s.iter().zip(basis).map(|(sr, v)| sr * v[off + p]).sum();
                    }
                });
                y
            })
            .collect()
    }

    /// Restarts from the leading `keep` Ritz pairs. The next Lanczos
    /// direction is `residual` when given, otherwise a random vector.
    fn thick_restart(
        &mut self,
        ritz: &RitzPairs,
        keep: usize,
        residual: Option<Vec<f64>>,
    ) -> Result<()> {
        let kept = self.ritz_vectors(ritz, keep);
        let m = self.m;
        self.proj.iter_mut().for_each(|x| *x = 0.0);
        for (i, &theta) in ritz.values[..keep].iter().enumerate() {
            self.proj[i * m + i] = theta;
        }
        self.basis = kept;
        let next = match residual {
            Some(mut r) => {
                orthogonalize(&self.basis, &mut r);
                let nrm = par::norm(&r);
                if nrm > 0.5 {
                    par::scale(1.0 / nrm, &mut r);
                    r
                } else {
                    self.stats.breakdowns += 1;
                    self.random_direction()?
                }
            }
            None => self.random_direction()?,
        };
        self.push(next);
        Ok(())
    }

    /// Unit random vector orthogonal to the current basis.
    fn random_direction(&mut self) -> Result<Vec<f64>> {
        if self.basis.len() >= self.n {
            self.state = RciState::Failed;
            return Err(Error::Breakdown);
        }
        for _ in 0..8 {
            let mut r = random_vector(&mut self.rng, self.n);
            let before = par::norm(&r);
            orthogonalize(&self.basis, &mut r);
            let after = par::norm(&r);
            if after > 1e-6 * before {
                par::scale(1.0 / after, &mut r);
                // one more pass against the tiny remainder's rounding
                orthogonalize(&self.basis, &mut r);
                let nrm = par::norm(&r);
                par::scale(1.0 / nrm, &mut r);
                return Ok(r);
            }
        }
        self.state = RciState::Failed;
        Err(Error::Breakdown)
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Two passes of modified Gram–Schmidt of `w` against `basis`. Returns the
/// accumulated projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut h = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (hi, v) in h.iter_mut().zip(basis) {
            let c = par::dot(v, w);
            par::axpy_neg(c, v, w);
            *hi += c;
        }
    }
    h
}
