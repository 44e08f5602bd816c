use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("point is not in the set (distance {distance:e})")]
    NotInSet { distance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("diverged at step {step}: non-finite state (try a smaller dt)")]
    Divergence { step: usize },

    #[error("node {node} diverged in round {round}: non-finite state (try a smaller dt)")]
    NodeDivergence { node: usize, round: usize },

    #[error("protocol error at node {node}: {detail}")]
    Protocol { node: usize, detail: String },

    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },

    #[error("graph is disconnected ({components} zero Laplacian eigenvalues)")]
    Disconnected { components: usize },

    #[error("edge label {label} out of range (graph has {count} edges)")]
    EdgeOutOfRange { label: usize, count: usize },

    #[error("negative edge weight {value} on edge {label}")]
    NegativeWeight { label: usize, value: f64 },

    #[error("matrix is not a graph Laplacian: {0}")]
    NotLaplacian(String),
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
