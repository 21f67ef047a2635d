//! Configuration pruning strategies and the geometric-mean selection score.
//!
//! Every clustering-based strategy produces *representatives* (performance
//! vectors); the best configuration of each representative joins the
//! selection. Under-full selections are topped up in optimal-count order.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::clustering::{self, ClusteringError};
use crate::dataset::PerformanceMatrix;
use crate::decomposition::{self, PcaError};
use crate::matrix::{argmax, Matrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PruningError {
    #[error("selection is empty")]
    EmptySelection,
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("config index {index} is out of range for {configs} configs")]
    IndexOutOfRange { index: usize, configs: usize },
    #[error("the decision-tree method needs one feature row per training problem")]
    MissingFeatures,
    #[error("no representatives were produced")]
    NoRepresentatives,
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Pca(#[from] PcaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    TopCount,
    KMeans,
    PcaKMeans,
    Hdbscan,
    DecisionTree,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::TopCount, Method::KMeans, Method::PcaKMeans, Method::Hdbscan, Method::DecisionTree];

    pub fn name(self) -> &'static str {
        match self {
            Method::TopCount => "top-count",
            Method::KMeans => "k-means",
            Method::PcaKMeans => "pca-k-means",
            Method::Hdbscan => "hdbscan",
            Method::DecisionTree => "decision-tree",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pruning method `{0}`")]
pub struct UnknownMethod(pub alloc::string::String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| UnknownMethod(s.into()))
    }
}

/// An ordered set of distinct configuration columns.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Selection {
    pub config_indices: Vec<usize>,
    pub method: Method,
    pub budget: usize,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.config_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config_indices.is_empty()
    }

    pub fn validate(&self, configs: usize) -> Result<(), PruningError> {
        if self.is_empty() {
            return Err(PruningError::EmptySelection);
        }
        if let Some(&index) = self.config_indices.iter().find(|&&i| i >= configs) {
            return Err(PruningError::IndexOutOfRange { index, configs });
        }
        Ok(())
    }
}

/// Geometric-mean relative performance in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Score {
    pub geomean_relative_performance: f64,
}

impl Score {
    /// Geometric mean of per-row achieved performance, computed in the log
    /// domain.
    pub fn from_achieved(achieved: impl IntoIterator<Item = f64>) -> Score {
        let (sum, n) = achieved.into_iter().fold((0.0, 0usize), |(s, n), v| (s + libm::log(v), n + 1));
        let value = if n == 0 { 1.0 } else { libm::exp(sum / n as f64) };
        Score { geomean_relative_performance: value }
    }

    pub fn percent(&self) -> f64 {
        self.geomean_relative_performance * 100.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}%", self.percent())
    }
}

/// How many rows each column is optimal for (ties to the lowest column).
pub fn optimal_counts(matrix: &PerformanceMatrix) -> Vec<usize> {
    let mut counts = vec![0usize; matrix.num_configs()];
    for best in matrix.row_argmax() {
        counts[best] += 1;
    }
    counts
}

/// All columns ranked by optimal count, descending; ties to the lower index.
pub fn top_count_order(matrix: &PerformanceMatrix) -> Vec<usize> {
    let counts = optimal_counts(matrix);
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order
}

/// Best column of each representative, deduplicated in first-seen order,
/// then optionally topped up from `top_count_order` to `min(budget, C)`.
pub fn representatives_to_selection<R: AsRef<[f64]>>(
    representatives: &[R],
    budget: usize,
    train: &PerformanceMatrix,
    method: Method,
    backfill: bool,
) -> Result<Selection, PruningError> {
    if representatives.is_empty() {
        return Err(PruningError::NoRepresentatives);
    }
    if budget == 0 {
        return Err(PruningError::ZeroBudget);
    }
    let mut picked: Vec<usize> = Vec::new();
    for rep in representatives {
        let best = argmax(rep.as_ref());
        if !picked.contains(&best) {
            picked.push(best);
        }
    }
    picked.truncate(budget);
    if backfill {
        let target = budget.min(train.num_configs());
        for c in top_count_order(train) {
            if picked.len() >= target {
                break;
            }
            if !picked.contains(&c) {
                picked.push(c);
            }
        }
    }
    Ok(Selection { config_indices: picked, method, budget })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOptions {
    pub backfill: bool,
    /// Variance fraction retained before clustering in PCA space.
    pub pca_variance_threshold: f64,
    pub kmeans_restarts: usize,
    pub hdbscan_min_cluster_size: usize,
    pub hdbscan_min_samples: usize,
}

impl Default for PruneOptions {
    fn default() -> Self {
        Self {
            backfill: true,
            pca_variance_threshold: 0.90,
            kmeans_restarts: clustering::kmeans::DEFAULT_RESTARTS,
            hdbscan_min_cluster_size: 3,
            hdbscan_min_samples: 2,
        }
    }
}

/// Run one pruning strategy on the training matrix.
///
/// `train_features` is only read by [`Method::DecisionTree`]; it must hold
/// one row per training problem. k-means budgets above the number of
/// training rows are clamped to it, and backfill supplies the rest.
pub fn prune(
    method: Method,
    train: &PerformanceMatrix,
    train_features: Option<&Matrix>,
    budget: usize,
    seed: u64,
    options: &PruneOptions,
) -> Result<Selection, PruningError> {
    if budget == 0 {
        return Err(PruningError::ZeroBudget);
    }
    let values = train.values();
    let to_selection = |reps: &[Vec<f64>]| representatives_to_selection(reps, budget, train, method, options.backfill);

    match method {
        Method::TopCount => {
            let mut order = top_count_order(train);
            order.truncate(budget);
            Ok(Selection { config_indices: order, method, budget })
        }
        Method::KMeans => {
            let k = budget.min(values.rows());
            let result = clustering::kmeans(values, k, seed, options.kmeans_restarts)?;
            to_selection(&rows_of(&result.centroids))
        }
        Method::PcaKMeans => {
            let full = decomposition::pca_fit_full(values)?;
            let r = full.components_for_threshold(options.pca_variance_threshold)?;
            let model = full.truncated(r);
            let scores = model.transform(values)?;
            let k = budget.min(values.rows());
            let result = clustering::kmeans(&scores, k, seed, options.kmeans_restarts)?;
            let centroids = model.inverse_transform(&result.centroids)?;
            to_selection(&rows_of(&centroids))
        }
        Method::Hdbscan => {
            let result = clustering::hdbscan(values, options.hdbscan_min_cluster_size, options.hdbscan_min_samples)?;
            let mut clusters: Vec<usize> = (0..result.num_clusters()).collect();
            // Highest stability first; ties keep the lower cluster id.
            clusters.sort_by(|&a, &b| result.stabilities[b].total_cmp(&result.stabilities[a]).then(a.cmp(&b)));
            clusters.truncate(budget);
            let reps: Vec<Vec<f64>> =
                clusters.iter().map(|&c| values.row(result.cluster_medoids[c]).to_vec()).collect();
            to_selection(&reps)
        }
        Method::DecisionTree => {
            let features = train_features.ok_or(PruningError::MissingFeatures)?;
            if features.rows() != values.rows() {
                return Err(PruningError::MissingFeatures);
            }
            let tree = clustering::fit_regression_tree(features, values, budget)?;
            let reps: Vec<Vec<f64>> = tree.leaf_values().into_iter().map(<[f64]>::to_vec).collect();
            to_selection(&reps)
        }
    }
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

/// Best performance reachable per row using only the selected columns.
pub fn achieved_per_row(selection: &Selection, matrix: &PerformanceMatrix) -> Result<Vec<f64>, PruningError> {
    selection.validate(matrix.num_configs())?;
    Ok(matrix
        .values()
        .iter_rows()
        .map(|row| selection.config_indices.iter().map(|&c| row[c]).fold(f64::MIN, f64::max))
        .collect())
}

/// Geometric mean over rows of the best selected performance.
pub fn evaluate_selection(selection: &Selection, matrix: &PerformanceMatrix) -> Result<Score, PruningError> {
    Ok(Score::from_achieved(achieved_per_row(selection, matrix)?))
}
