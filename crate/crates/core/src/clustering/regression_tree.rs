//! Multi-output CART regression tree grown best-first under a leaf budget.

use alloc::vec;
use alloc::vec::Vec;

use super::ClusteringError;
use crate::matrix::Matrix;

/// A split must remove more than this fraction of the node's squared error.
const MIN_RELATIVE_GAIN: f64 = 1e-12;
/// Rounding floor, relative to the node's summed squared targets, below
/// which error reductions are indistinguishable from zero.
const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegressionNode {
    /// Rows with `feature < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionTree {
    /// Node 0 is the root.
    pub nodes: Vec<RegressionNode>,
    pub leaf_count: usize,
    pub n_features: usize,
    pub n_outputs: usize,
}

/// Threshold strictly above `low` and at most `high`, so that `low` routes
/// left and `high` routes right under the `<` convention.
pub(crate) fn split_threshold(low: f64, high: f64) -> f64 {
    let mid = low + (high - low) / 2.0;
    if mid > low {
        mid
    } else {
        high
    }
}

#[derive(Debug, Clone)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn sum_rows(targets: &Matrix, rows: &[usize]) -> Vec<f64> {
    let mut sum = vec![0.0; targets.cols()];
    for &r in rows {
        sum.iter_mut().zip(targets.row(r)).for_each(|(s, v)| *s += v);
    }
    sum
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Sum of squared deviations from the mean, summed over outputs.
fn sse(targets: &Matrix, rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let n = rows.len() as f64;
    let mean: Vec<f64> = sum_rows(targets, rows).into_iter().map(|s| s / n).collect();
    rows.iter().map(|&r| targets.row(r).iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>()).sum()
}

fn best_split(features: &Matrix, targets: &Matrix, rows: &[usize]) -> Option<SplitChoice> {
    if rows.len() < 2 {
        return None;
    }
    let node_sse = sse(targets, rows);
    let floor = NOISE_FLOOR * rows.iter().map(|&r| squared_norm(targets.row(r))).sum::<f64>();
    if node_sse <= floor {
        return None;
    }
    let n = rows.len();
    let total = sum_rows(targets, rows);
    let base = squared_norm(&total) / n as f64;

    let mut best: Option<(usize, f64, f64, usize)> = None;
    let mut sorted = rows.to_vec();
    for f in 0..features.cols() {
        sorted.sort_by(|&a, &b| features[(a, f)].total_cmp(&features[(b, f)]).then(a.cmp(&b)));
        let mut left_sum = vec![0.0; targets.cols()];
        for i in 1..n {
            let prev = sorted[i - 1];
            left_sum.iter_mut().zip(targets.row(prev)).for_each(|(s, v)| *s += v);
            let (lo, hi) = (features[(prev, f)], features[(sorted[i], f)]);
            if lo == hi {
                continue;
            }
            let right_sq: f64 = left_sum.iter().zip(&total).map(|(l, t)| (t - l) * (t - l)).sum();
            let gain = squared_norm(&left_sum) / i as f64 + right_sq / (n - i) as f64 - base;
            if best.is_none_or(|b| gain > b.2) {
                best = Some((f, split_threshold(lo, hi), gain, i));
            }
        }
    }

    let (feature, threshold, gain, _) = best?;
    if gain <= floor.max(MIN_RELATIVE_GAIN * node_sse) {
        return None;
    }
    let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| features[(r, feature)] < threshold);
    Some(SplitChoice { feature, threshold, gain, left, right })
}

fn leaf(targets: &Matrix, rows: &[usize]) -> RegressionNode {
    let n = rows.len().max(1) as f64;
    RegressionNode::Leaf { value: sum_rows(targets, rows).into_iter().map(|s| s / n).collect(), count: rows.len() }
}

/// Grow a tree with at most `max_leaves` leaves. Each step splits the
/// frontier leaf with the largest squared-error reduction; ties go to the
/// leaf created first, then the lower feature, then the lower threshold.
pub fn fit_regression_tree(
    features: &Matrix,
    targets: &Matrix,
    max_leaves: usize,
) -> Result<RegressionTree, ClusteringError> {
    if features.rows() != targets.rows() {
        return Err(ClusteringError::DimensionMismatch { expected: features.rows(), actual: targets.rows() });
    }
    if features.rows() == 0 {
        return Err(ClusteringError::TooFewPoints { points: 0, required: 1 });
    }
    if max_leaves == 0 {
        return Err(ClusteringError::InvalidParameter("max_leaves must be at least 1"));
    }

    let all: Vec<usize> = (0..features.rows()).collect();
    let mut nodes = vec![leaf(targets, &all)];
    // (node index, split if one is worthwhile)
    let mut frontier: Vec<(usize, Option<SplitChoice>)> = vec![(0, best_split(features, targets, &all))];
    let mut leaf_count = 1;

    while leaf_count < max_leaves {
        let mut pick: Option<usize> = None;
        for (i, (_, choice)) in frontier.iter().enumerate() {
            if let Some(c) = choice {
                if pick.is_none_or(|p| c.gain > frontier[p].1.as_ref().map_or(0.0, |b| b.gain)) {
                    pick = Some(i);
                }
            }
        }
        let Some(i) = pick else { break };
        let (node, choice) = frontier.remove(i);
        let choice = choice.expect("picked entries carry a split");

        let left = nodes.len();
        let right = left + 1;
        nodes.push(leaf(targets, &choice.left));
        nodes.push(leaf(targets, &choice.right));
        nodes[node] = RegressionNode::Split { feature: choice.feature, threshold: choice.threshold, left, right };
        frontier.push((left, best_split(features, targets, &choice.left)));
        frontier.push((right, best_split(features, targets, &choice.right)));
        // Keep frontier in creation order so ties resolve to older leaves.
        frontier.sort_by_key(|(n, _)| *n);
        leaf_count += 1;
    }

    Ok(RegressionTree { nodes, leaf_count, n_features: features.cols(), n_outputs: targets.cols() })
}

impl RegressionTree {
    /// Index of the leaf node `row` falls into.
    pub fn leaf_index(&self, row: &[f64]) -> Result<usize, ClusteringError> {
        if row.len() != self.n_features {
            return Err(ClusteringError::DimensionMismatch { expected: self.n_features, actual: row.len() });
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                RegressionNode::Split { feature, threshold, left, right } => {
                    at = if row[*feature] < *threshold { *left } else { *right }
                }
                RegressionNode::Leaf { .. } => return Ok(at),
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<&[f64], ClusteringError> {
        match &self.nodes[self.leaf_index(row)?] {
            RegressionNode::Leaf { value, .. } => Ok(value),
            RegressionNode::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Leaf value vectors in node order.
    pub fn leaf_values(&self) -> Vec<&[f64]> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                RegressionNode::Leaf { value, .. } => Some(value.as_slice()),
                RegressionNode::Split { .. } => None,
            })
            .collect()
    }

    /// Total squared error of the tree's leaf means over `rows`.
    pub fn training_sse(&self, features: &Matrix, targets: &Matrix) -> f64 {
        features
            .iter_rows()
            .zip(targets.iter_rows())
            .map(|(x, y)| {
                let pred = self.predict(x).expect("width checked by caller");
                pred.iter().zip(y).map(|(p, v)| (p - v) * (p - v)).sum::<f64>()
            })
            .sum()
    }
}

/// Free-function form of [`RegressionTree::predict`].
pub fn predict_tree<'a>(tree: &'a RegressionTree, feature_row: &[f64]) -> Result<&'a [f64], ClusteringError> {
    tree.predict(feature_row)
}
