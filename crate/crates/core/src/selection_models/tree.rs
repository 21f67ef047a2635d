//! CART classification tree (Gini), grown until every leaf is pure or its
//! rows are indistinguishable.

use alloc::vec;
use alloc::vec::Vec;

use crate::clustering::regression_tree::split_threshold;
use crate::matrix::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClassNode {
    /// Rows with `feature < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationTree {
    /// Node 0 is the root.
    pub nodes: Vec<ClassNode>,
}

/// Random feature subsampling for forests.
pub(crate) struct FeatureSampling<'a> {
    pub max_features: usize,
    pub rng: &'a mut Rng,
}

fn majority(labels: &[usize], rows: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    rows.iter().for_each(|&r| counts[labels[r]] += 1);
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Best Gini split of `rows` over `candidates` (ascending). Maximizes
/// `sum_L c^2 / n_L + sum_R c^2 / n_R`, which is the same as minimizing the
/// weighted child impurity. Ties keep the earlier feature and threshold.
fn best_split(
    features: &Matrix,
    labels: &[usize],
    n_classes: usize,
    rows: &[usize],
    candidates: &[usize],
) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut total = vec![0usize; n_classes];
    rows.iter().for_each(|&r| total[labels[r]] += 1);

    let mut best: Option<(usize, f64, f64)> = None;
    let mut sorted = rows.to_vec();
    for &f in candidates {
        sorted.sort_by(|&a, &b| features[(a, f)].total_cmp(&features[(b, f)]).then(a.cmp(&b)));
        let mut left = vec![0usize; n_classes];
        for i in 1..n {
            left[labels[sorted[i - 1]]] += 1;
            let (lo, hi) = (features[(sorted[i - 1], f)], features[(sorted[i], f)]);
            if lo == hi {
                continue;
            }
            let (mut sq_left, mut sq_right) = (0.0, 0.0);
            for (l, t) in left.iter().zip(&total) {
                let r = t - l;
                sq_left += (*l * *l) as f64;
                sq_right += (r * r) as f64;
            }
            let score = sq_left / i as f64 + sq_right / (n - i) as f64;
            if best.is_none_or(|b| score > b.2) {
                best = Some((f, split_threshold(lo, hi), score));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

impl ClassificationTree {
    /// Fit on `rows` (repeats allowed, as in bootstrap samples).
    pub(crate) fn fit(
        features: &Matrix,
        labels: &[usize],
        n_classes: usize,
        rows: Vec<usize>,
        mut sampling: Option<FeatureSampling<'_>>,
    ) -> ClassificationTree {
        let all_features: Vec<usize> = (0..features.cols()).collect();
        let mut nodes = vec![ClassNode::Leaf { label: 0 }];
        let mut stack = vec![(0usize, rows)];
        while let Some((at, rows)) = stack.pop() {
            let first = labels[rows[0]];
            if rows.iter().all(|&r| labels[r] == first) {
                nodes[at] = ClassNode::Leaf { label: first };
                continue;
            }
            let candidates = match sampling.as_mut() {
                Some(s) if s.max_features < all_features.len() => {
                    let mut pool = all_features.clone();
                    for i in 0..s.max_features {
                        let j = i + s.rng.below(pool.len() - i);
                        pool.swap(i, j);
                    }
                    pool.truncate(s.max_features);
                    pool.sort_unstable();
                    pool
                }
                _ => all_features.clone(),
            };
            let split = best_split(features, labels, n_classes, &rows, &candidates).or_else(|| {
                // The drawn features are constant here; use the rest.
                best_split(features, labels, n_classes, &rows, &all_features)
            });
            let Some((feature, threshold)) = split else {
                nodes[at] = ClassNode::Leaf { label: majority(labels, &rows, n_classes) };
                continue;
            };
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| features[(r, feature)] < threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(ClassNode::Leaf { label: 0 });
            nodes.push(ClassNode::Leaf { label: 0 });
            nodes[at] = ClassNode::Split { feature, threshold, left, right };
            // Right pushed first so the left subtree is grown first.
            stack.push((right, right_rows));
            stack.push((left, left_rows));
        }
        ClassificationTree { nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                ClassNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] < *threshold { *left } else { *right }
                }
                ClassNode::Leaf { label } => return *label,
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, ClassNode::Split { .. })).count()
    }
}
