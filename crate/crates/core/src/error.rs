use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layer sizes must all be positive (got {n_in}+{n_hid}+{n_out})")]
    EmptyLayer { n_in: usize, n_hid: usize, n_out: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid node partition: {0}")]
    Partition(String),

    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: usize, j: usize, reason: String },

    #[error("coupling graph is disconnected")]
    Disconnected,

    #[error("no connected graph after {0} attempts")]
    ConnectivityRetries(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max |m - m^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("equilibrium solve did not converge (residual {residual:e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("output nodes are spectrally indistinguishable (all separations vanish)")]
    IndistinguishableOutputs,

    #[error("node {0} is pinned and cannot be used as a seeding output")]
    PinnedOutput(usize),

    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset must contain both classes of the task (missing {0:?})")]
    MissingClass(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("both samples have zero variance")]
    ZeroVariance,
}
