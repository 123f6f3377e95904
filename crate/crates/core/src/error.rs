use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not strictly lower triangular: nonzero entry at ({row}, {col})")]
    NotStrictlyLower { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weight matrix is not acyclic")]
    CyclicGraph,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid graph spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data matrix is identically zero")]
    ZeroData,

    #[error("non-finite value encountered at solver iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("fitness {0} cannot be used for inverse-proportional selection")]
    NonPositiveFitness(f64),

    #[error("refusing exhaustive search over {p}! = {count} permutations (limit is p <= {limit})")]
    ExplicitRefusal { p: usize, count: u64, limit: usize },

    #[error("no permutation reached a converged inner solve")]
    NoConvergedSolve,

    #[error("lambda grid is empty")]
    EmptyGrid,

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("malformed csv {}{}: {msg}", path.display(), location(*row, *column))]
    MalformedCsv {
        path: PathBuf,
        row: Option<usize>,
        column: Option<usize>,
        msg: String,
    },

    #[error("malformed edge list {} at line {line}: {msg}", path.display())]
    MalformedEdgeList {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(row: Option<usize>, column: Option<usize>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" (row {r}, column {c})"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (column {c})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by reading or parsing input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::MalformedCsv { .. } | Error::MalformedEdgeList { .. }
        )
    }
}
