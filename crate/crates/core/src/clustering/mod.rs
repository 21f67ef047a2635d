//! Clustering and regression primitives behind the pruning strategies.

use thiserror::Error;

pub mod hdbscan;
pub mod kmeans;
pub mod regression_tree;

pub use hdbscan::{hdbscan, HdbscanResult};
pub use kmeans::{kmeans, KMeansResult};
pub use regression_tree::{fit_regression_tree, predict_tree, RegressionNode, RegressionTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusteringError {
    #[error("k = {k} exceeds the number of points ({points})")]
    KTooLarge { k: usize, points: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("{points} points is fewer than the required {required}")]
    TooFewPoints { points: usize, required: usize },
    #[error("expected width {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{0}")]
    InvalidParameter(&'static str),
}
