//! k-nearest-neighbour classifier in scaled feature space.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Knn {
    pub k: usize,
    pub n_classes: usize,
    pub points: Matrix,
    pub labels: Vec<usize>,
}

impl Knn {
    pub fn fit(features: &Matrix, labels: &[usize], n_classes: usize, k: usize) -> Knn {
        Knn { k: k.clamp(1, features.rows().max(1)), n_classes, points: features.clone(), labels: labels.to_vec() }
    }

    /// Majority label among the `k` nearest rows. Equal distances prefer the
    /// lower row; equal votes prefer the lower label.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut order: Vec<(f64, usize)> =
            self.points.iter_rows().enumerate().map(|(i, row)| (squared_distance(row, x), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.n_classes];
        order.iter().take(self.k).for_each(|&(_, i)| votes[self.labels[i]] += 1);
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}
