use std::fmt;

/// Pipeline stage a failure originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Graph,
    Laplacian,
    Eigen,
    Kmeans,
    Metrics,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Input => "input",
            Stage::Graph => "graph",
            Stage::Laplacian => "laplacian",
            Stage::Eigen => "eigen",
            Stage::Kmeans => "kmeans",
            Stage::Metrics => "metrics",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of bounds for {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("degenerate vector at point {index} (zero or constant)")]
    DegenerateVector { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("isolated nodes: {0:?}")]
    IsolatedNode(Vec<usize>),

    #[error("zero degree at node {index}")]
    ZeroDegree { index: usize },

    #[error("bad eigensolver configuration: {0}")]
    BadConfig(String),

    #[error("Lanczos breakdown: no new basis direction could be generated")]
    Breakdown,

    #[error("eigensolver did not converge after {restarts} restarts (wanted-pair residual estimates {residuals:?})")]
    MaxRestartsExceeded { restarts: usize, residuals: Vec<f64> },

    #[error("eigensolver session has not converged")]
    NotConverged,

    #[error("operator is not symmetric (defect {defect:e}, scale {scale:e})")]
    NotSymmetric { defect: f64, scale: f64 },

    #[error("part {part} is empty")]
    EmptyPart { part: usize },

    #[error("part {part} has zero volume")]
    ZeroVolumePart { part: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any stage tag removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
