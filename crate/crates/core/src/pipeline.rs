//! End-to-end spectral clustering.
//!
//! 1. build or load the similarity matrix `W`
//! 2. degrees, isolated-node handling and `D^{-1/2} W D^{-1/2}`
//! 3. top-`k` eigenpairs of the symmetric operator
//! 4. map them to eigenvectors of `D⁻¹W`
//! 5. k-means on the rows of the resulting n×k embedding
//! 6. normalized cut of the partition on `W`

use std::time::{Duration, Instant};

use crate::dense::{DenseMatrix, PointMatrix};
use crate::eigen::{eigensolve, LanczosConfig};
use crate::error::{Error, Result, Stage};
use crate::graph::{
    build_edges_eps, build_edges_knn, build_edges_threshold, build_similarity, EdgeList,
    NegativePolicy, SimilarityMeasure,
};
use crate::kmeans::{kmeans, KmeansConfig, Labeling};
use crate::laplacian::{degrees, handle_isolated, recover_row_eigvecs, sym_scale, IsolatedPolicy};
use crate::metrics::{ncut, Partition};
use crate::sparse::{CooMatrix, CsrMatrix, DupPolicy};

/// k-means restarts used by [`PipelineConfig::new`].
pub const DEFAULT_KMEANS_RESTARTS: usize = 10;

/// Sparsity pattern used when the input is a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPattern {
    /// Pairs within Euclidean distance `eps`.
    Eps(f64),
    /// Union of each point's `knn` most similar points.
    Knn(usize),
    /// Pairs with similarity strictly above the threshold.
    Threshold(f64),
}

#[derive(Debug, Clone)]
pub enum PipelineInput {
    Points {
        points: PointMatrix,
        pattern: GraphPattern,
        measure: SimilarityMeasure,
    },
    /// Unit-weight graph. `n` defaults to one more than the largest index.
    Edges { pairs: Vec<(usize, usize)>, n: Option<usize> },
    /// Similarity matrix; duplicate entries are summed.
    Matrix(CooMatrix),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PipelineInput,
    pub k_clusters: usize,
    /// Its `k` is replaced by `k_clusters`.
    pub eigen: LanczosConfig,
    /// Its `k` is replaced by `k_clusters`.
    pub kmeans: KmeansConfig,
    pub isolated_policy: IsolatedPolicy,
    /// Applies to similarities computed from points.
    pub negative_policy: NegativePolicy,
    /// Scale embedding rows to unit length before k-means.
    pub normalize_rows: bool,
}

impl PipelineConfig {
    pub fn new(input: PipelineInput, k_clusters: usize) -> Self {
        PipelineConfig {
            input,
            k_clusters,
            eigen: LanczosConfig::new(k_clusters),
            kmeans: KmeansConfig {
                n_init: DEFAULT_KMEANS_RESTARTS,
                ..KmeansConfig::new(k_clusters)
            },
            isolated_policy: IsolatedPolicy::default(),
            negative_policy: NegativePolicy::default(),
            normalize_rows: false,
        }
    }

    /// Seeds both the eigensolver and k-means.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.eigen.seed = seed;
        self.kmeans.seed = seed;
        self
    }
}

/// Wall time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub graph: Duration,
    pub laplacian: Duration,
    pub eigen: Duration,
    pub kmeans: Duration,
    pub metrics: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.graph + self.laplacian + self.eigen + self.kmeans + self.metrics
    }
}

#[derive(Debug, Clone)]
pub struct ClusterReport {
    /// Over the clustered nodes, indexed as in `kept`.
    pub labeling: Labeling,
    pub eigenvalues: Vec<f64>,
    /// Normalized cut of `labeling` on the clustered part of `W`.
    pub ncut_value: f64,
    pub timings: StageTimings,
    pub warnings: Vec<String>,
    /// Original indices of the clustered nodes, increasing.
    pub kept: Vec<usize>,
    /// Node count before isolated-node removal.
    pub n_nodes: usize,
}

impl ClusterReport {
    /// Labels over all original nodes; `None` for removed nodes.
    pub fn full_labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_nodes];
        for (&old, &l) in self.kept.iter().zip(&self.labeling.labels) {
            out[old] = Some(l);
        }
        out
    }
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let r = f();
    *slot = t.elapsed();
    r
}

/// The similarity matrix described by `input`, in CSR form.
pub fn build_matrix(input: &PipelineInput, negative_policy: NegativePolicy) -> Result<CsrMatrix> {
    let coo = match input {
        PipelineInput::Points {
            points,
            pattern,
            measure,
        } => {
            let edges = match *pattern {
                GraphPattern::Eps(eps) => build_edges_eps(points, eps)?,
                GraphPattern::Knn(knn) => build_edges_knn(points, knn, *measure)?,
                GraphPattern::Threshold(lambda) => build_edges_threshold(points, lambda, *measure)?,
            };
            build_similarity(points, &edges, *measure, negative_policy)?
        }
        PipelineInput::Edges { pairs, n } => {
            let n = n.unwrap_or_else(|| pairs.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0));
            EdgeList::new(pairs.clone(), n)?.to_unweighted(n)?
        }
        PipelineInput::Matrix(m) => m.canonicalize(DupPolicy::Sum)?,
    };
    let w = coo.to_csr()?;
    if !w.is_square() {
        return Err(Error::NotSquare {
            n_rows: w.n_rows(),
            n_cols: w.n_cols(),
        });
    }
    Ok(w)
}

/// Runs the whole pipeline. Errors carry the stage they came from.
pub fn run(cfg: &PipelineConfig) -> Result<ClusterReport> {
    let k = cfg.k_clusters;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k_clusters must be at least 2, got {k}")).at(Stage::Input));
    }
    let mut timings = StageTimings::default();
    let mut warnings = Vec::new();

    let w = timed(&mut timings.graph, || build_matrix(&cfg.input, cfg.negative_policy))
        .map_err(|e| e.at(Stage::Graph))?;
    let n_nodes = w.n_rows();

    let (reduced, op) = timed(&mut timings.laplacian, || {
        let d = degrees(&w)?;
        let reduced = handle_isolated(&w, &d, cfg.isolated_policy)?;
        if reduced.kept.len() < k {
            return Err(Error::InvalidArgument(format!(
                "{k} clusters requested but the graph has {} usable nodes",
                reduced.kept.len()
            )));
        }
        let op = sym_scale(&reduced.matrix, &reduced.degrees)?;
        Ok((reduced, op))
    })
    .map_err(|e| e.at(Stage::Laplacian))?;
    let removed = n_nodes - reduced.kept.len();
    if removed > 0 {
        warnings.push(format!("removed {removed} isolated node(s)"));
    }

    let basis = timed(&mut timings.eigen, || {
        eigensolve(&op, &LanczosConfig { k, ..cfg.eigen })
    })
    .map_err(|e| e.at(Stage::Eigen))?;

    let labeling = timed(&mut timings.kmeans, || {
        let rows = recover_row_eigvecs(&basis.vectors, &reduced.degrees)?;
        let embedding: DenseMatrix = if cfg.normalize_rows {
            rows.normalized_rows()
        } else {
            rows
        };
        kmeans(&embedding, &KmeansConfig { k, ..cfg.kmeans })
    })
    .map_err(|e| e.at(Stage::Kmeans))?;
    if labeling.reseeded > 0 {
        warnings.push(format!("k-means reseeded {} empty cluster(s)", labeling.reseeded));
    }
    if labeling.iters_run == cfg.kmeans.max_iters {
        warnings.push(format!("k-means stopped at the iteration limit ({})", cfg.kmeans.max_iters));
    }

    let ncut_value = timed(&mut timings.metrics, || {
        ncut(&reduced.matrix, &Partition::new(labeling.labels.clone(), k)?)
    })
    .map_err(|e| e.at(Stage::Metrics))?;

    Ok(ClusterReport {
        labeling,
        eigenvalues: basis.values,
        ncut_value,
        timings,
        warnings,
        kept: reduced.kept,
        n_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangles() -> PipelineInput {
        PipelineInput::Edges {
            pairs: vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
            n: None,
        }
    }

    #[test]
    fn two_triangles_split_exactly() {
        let r = run(&PipelineConfig::new(triangles(), 2).with_seed(3)).unwrap();
        let l = &r.labeling.labels;
        assert!(l[0] == l[1] && l[1] == l[2] && l[3] == l[4] && l[4] == l[5] && l[0] != l[3]);
        assert_eq!(r.ncut_value, 0.0);
        assert!(r.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-8));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn too_many_clusters() {
        let e = run(&PipelineConfig::new(triangles(), 7)).unwrap_err();
        assert_eq!(e.stage(), Some(Stage::Laplacian));
        assert!(matches!(e.root(), Error::InvalidArgument(_)));
        let e = run(&PipelineConfig::new(triangles(), 1)).unwrap_err();
        assert_eq!(e.stage(), Some(Stage::Input));
    }

    #[test]
    fn isolated_nodes_by_policy() {
        let input = PipelineInput::Edges {
            pairs: vec![(0, 1), (1, 2), (0, 2), (4, 5), (5, 6), (4, 6)],
            n: Some(8),
        };
        let mut cfg = PipelineConfig::new(input, 2);
        let e = run(&cfg).unwrap_err();
        assert_eq!(e.stage(), Some(Stage::Laplacian));
        assert!(matches!(e.root(), Error::IsolatedNode(v) if v == &vec![3, 7]));

        cfg.isolated_policy = IsolatedPolicy::Remove;
        let r = run(&cfg).unwrap();
        assert_eq!(r.kept, vec![0, 1, 2, 4, 5, 6]);
        let full = r.full_labels();
        assert_eq!(full[3], None);
        assert_eq!(full[7], None);
        assert_eq!(full[0], full[2]);
        assert_ne!(full[0], full[5]);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn points_input() {
        let pts = DenseMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.0, 0.1],
            vec![5.0, 5.0],
            vec![5.1, 5.0],
            vec![5.0, 5.1],
        ])
        .unwrap();
        let input = PipelineInput::Points {
            points: pts,
            pattern: GraphPattern::Eps(1.0),
            measure: SimilarityMeasure::exp_decay(1.0).unwrap(),
        };
        let r = run(&PipelineConfig::new(input, 2)).unwrap();
        let l = &r.labeling.labels;
        assert!(l[..3].iter().all(|&x| x == l[0]) && l[3..].iter().all(|&x| x == l[3]));
        assert_ne!(l[0], l[3]);
    }
}
