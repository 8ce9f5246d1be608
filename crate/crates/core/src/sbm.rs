//! Planted-partition stochastic block model.
//!
//! Nodes are numbered block by block. Every unordered pair is connected
//! independently: with probability `p_in` inside a block, `p_out` across
//! blocks.
//!
//! Randomness: the seed keys a ChaCha8 generator and node `i` draws from
//! stream `i`, consuming exactly one uniform per pair `(i, j)` with `j > i`,
//! in increasing `j`. Rows are therefore independent of one another and of
//! how they are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::CooMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn new(block_sizes: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> Self {
        SbmConfig {
            block_sizes,
            p_in,
            p_out,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must all be at least 1".into()));
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SbmGraph {
    /// Symmetric 0/1 adjacency in canonical order, no self-loops.
    pub matrix: CooMatrix,
    /// Planted block of each node.
    pub labels: Vec<usize>,
}

pub fn sbm_generate(cfg: &SbmConfig) -> Result<SbmGraph> {
    cfg.validate()?;
    let labels: Vec<usize> = cfg
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = labels.len();

    let upper: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            (i + 1..n)
                .filter(|&j| {
                    let p = if labels[i] == labels[j] { cfg.p_in } else { cfg.p_out };
                    rng.random::<f64>() < p
                })
                .collect()
        })
        .collect();

    // lower-triangle entries of row i are the j < i whose upper rows hold i
    let mut lower: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in upper.iter().enumerate() {
        for &j in row {
            lower[j].push(i);
        }
    }
    let nnz = 2 * upper.iter().map(Vec::len).sum::<usize>();
    let mut rows = Vec::with_capacity(nnz);
    let mut cols = Vec::with_capacity(nnz);
    for i in 0..n {
        for &j in lower[i].iter().chain(&upper[i]) {
            rows.push(i);
            cols.push(j);
        }
    }
    let matrix = CooMatrix::new(n, n, rows, cols, vec![1.0; nnz])?;
    debug_assert!(matrix.is_canonical());
    Ok(SbmGraph { matrix, labels })
}
