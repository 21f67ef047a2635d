//! Lloyd's k-means with k-means++ seeding and seeded restarts.

use alloc::vec;
use alloc::vec::Vec;

use super::ClusteringError;
use crate::matrix::{squared_distance, Matrix};
use crate::rng::{streams, Rng};

pub const MAX_ITERATIONS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia against the current centroids after each assignment step,
    /// starting with the seeding.
    pub inertia_trace: Vec<f64>,
}

/// Nearest centroid and its squared distance; ties go to the lower index.
fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter_rows().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn assign(points: &Matrix, centroids: &Matrix) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter_rows()
        .map(|p| {
            let (i, d) = nearest(p, centroids);
            inertia += d;
            i
        })
        .collect();
    (labels, inertia)
}

fn plus_plus_seeds(points: &Matrix, k: usize, rng: &mut Rng) -> Matrix {
    let n = points.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.below(n));
    let mut d2: Vec<f64> = points.iter_rows().map(|p| squared_distance(p, points.row(chosen[0]))).collect();

    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave the target just past the final sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap_or(0))
        } else {
            // Every point coincides with a chosen one.
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.below(unused.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter_rows().enumerate() {
            let d = squared_distance(p, points.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    points.select_rows(&chosen)
}

fn update_centroids(points: &Matrix, labels: &[usize], centroids: &mut Matrix) {
    let (k, dim) = (centroids.rows(), centroids.cols());
    let mut sums = Matrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter_rows().zip(labels) {
        counts[l] += 1;
        sums.row_mut(l).iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    for (c, &count) in counts.iter().enumerate() {
        // Empty clusters keep their previous centroid.
        if count > 0 {
            let n = count as f64;
            centroids.row_mut(c).iter_mut().zip(sums.row(c)).for_each(|(dst, s)| *dst = s / n);
        }
    }
}

fn lloyd(points: &Matrix, mut centroids: Matrix) -> KMeansResult {
    let (mut labels, inertia0) = assign(points, &centroids);
    let mut trace = vec![inertia0];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        update_centroids(points, &labels, &mut centroids);
        let (next, inertia) = assign(points, &centroids);
        iterations += 1;
        trace.push(inertia);
        let converged = next == labels;
        labels = next;
        if converged {
            break;
        }
    }
    let inertia = *trace.last().expect("trace is never empty");
    KMeansResult { centroids, assignments: labels, inertia, iterations, inertia_trace: trace }
}

/// Best-of-`restarts` k-means. Restart `r` seeds from stream `(seed, r)`,
/// so adding restarts only ever adds candidates.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult, ClusteringError> {
    if k == 0 {
        return Err(ClusteringError::ZeroClusters);
    }
    if k > points.rows() {
        return Err(ClusteringError::KTooLarge { k, points: points.rows() });
    }
    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = Rng::stream(seed, &[streams::KMEANS, restart as u64]);
        let seeds = plus_plus_seeds(points, k, &mut rng);
        let result = lloyd(points, seeds);
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Matrix {
        Matrix::from_vec(xs.len(), 1, xs.to_vec())
    }

    /// Minimum inertia over every assignment of the points to two groups.
    fn exhaustive_two_means(xs: &[f64]) -> f64 {
        let n = xs.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut inertia = 0.0;
            for side in [true, false] {
                let group: Vec<f64> = (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).map(|i| xs[i]).collect();
                let mean = group.iter().sum::<f64>() / group.len() as f64;
                inertia += group.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            }
            best = best.min(inertia);
        }
        best
    }

    #[test]
    fn four_point_instance_matches_the_partition_oracle() {
        let xs = [0.0, 0.1, 10.0, 10.1];
        let oracle = exhaustive_two_means(&xs);
        assert!((oracle - 0.01).abs() < 1e-12);
        let r = kmeans(&line(&xs), 2, 42, DEFAULT_RESTARTS).unwrap();
        assert!((r.inertia - oracle).abs() < 1e-12);
        let mut cs: Vec<f64> = r.centroids.as_slice().to_vec();
        cs.sort_by(f64::total_cmp);
        assert!((cs[0] - 0.05).abs() < 1e-12 && (cs[1] - 10.05).abs() < 1e-12);
    }

    #[test]
    fn k_equal_to_points_has_zero_inertia() {
        let pts = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [5.0, -1.0], [0.5, 0.5]]);
        let r = kmeans(&pts, 4, 9, 1).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut labels = r.assignments.clone();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = line(&[1.0, 2.0, 6.0]);
        let r = kmeans(&pts, 1, 0, 3).unwrap();
        assert!((r.centroids[(0, 0)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_k() {
        assert_eq!(kmeans(&line(&[1.0]), 2, 0, 1), Err(ClusteringError::KTooLarge { k: 2, points: 1 }));
        assert_eq!(kmeans(&line(&[1.0]), 0, 0, 1), Err(ClusteringError::ZeroClusters));
    }

    #[test]
    fn duplicate_points_still_seed() {
        let pts = line(&[3.0, 3.0, 3.0]);
        let r = kmeans(&pts, 3, 5, 2).unwrap();
        assert_eq!(r.inertia, 0.0);
    }
}
