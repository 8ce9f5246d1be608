//! Spectral clustering on sparse similarity graphs.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`graph`]: build a sparse similarity matrix `W` from data points.
//! 2. [`laplacian`]: degrees and the normalized operator `D^{-1/2} W D^{-1/2}`.
//! 3. [`eigen`]: top-k eigenpairs by thick-restart Lanczos behind a
//!    reverse-communication interface.
//! 4. [`kmeans`]: k-means++ seeding and Lloyd iterations on the rows of the
//!    eigenvector embedding.
//!
//! [`pipeline::run`] wires them together; [`sbm`] generates planted-partition
//! benchmark graphs and [`metrics`] scores partitions.

pub mod cli;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod laplacian;
pub mod metrics;
mod par;
pub mod pipeline;
pub mod sbm;
pub mod sparse;

pub use dense::{DenseMatrix, PointMatrix};
pub use error::{Error, Result, Stage};
pub use sparse::{CooMatrix, CsrMatrix, DupPolicy};
