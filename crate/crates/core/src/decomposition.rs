//! Principal component analysis over the rows of a performance matrix.
//!
//! Rows (problems) are the observations and columns (configurations) the
//! variables. The model is built from the thin SVD of the mean-centred
//! data; explained-variance ratios always use the full spectrum in the
//! denominator, so truncated models still report fractions of the total.

use alloc::vec::Vec;

use thiserror::Error;

use crate::matrix::{dot, Matrix};
use crate::svd::right_svd;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcaError {
    #[error("PCA needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("requested {requested} components but at most {max} are available")]
    TooManyComponents { requested: usize, max: usize },
    #[error("expected rows of width {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("threshold {threshold} is not reachable; the full spectrum explains {reached}")]
    Unreachable { threshold: f64, reached: f64 },
    #[error("threshold {0} must lie in (0, 1]")]
    InvalidThreshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaModel {
    /// Column means of the fitted data.
    pub mean: Vec<f64>,
    /// `r x C`, orthonormal rows.
    pub components: Matrix,
    pub singular_values: Vec<f64>,
    /// Sample variance (`P - 1` denominator) along each retained component.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Fit a PCA model retaining `n_components` axes (`0..=min(P, C)`).
pub fn pca_fit(matrix: &Matrix, n_components: usize) -> Result<PcaModel, PcaError> {
    let (p, c) = (matrix.rows(), matrix.cols());
    if p < 2 {
        return Err(PcaError::TooFewRows(p));
    }
    let max = p.min(c);
    if n_components > max {
        return Err(PcaError::TooManyComponents { requested: n_components, max });
    }

    let mean = matrix.column_means();
    let mut centred = matrix.clone();
    for r in 0..p {
        centred.row_mut(r).iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }

    let svd = right_svd(&centred);
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let dof = (p - 1) as f64;

    let singular_values = svd.singular_values[..n_components].to_vec();
    let explained_variance = singular_values.iter().map(|s| s * s / dof).collect();
    let explained_variance_ratio =
        singular_values.iter().map(|s| if total > 0.0 { s * s / total } else { 0.0 }).collect();
    let components = svd.right_vectors.select_rows(&(0..n_components).collect::<Vec<_>>());

    Ok(PcaModel { mean, components, singular_values, explained_variance, explained_variance_ratio })
}

/// Fit with every non-trivial component, `min(P - 1, C)`.
pub fn pca_fit_full(matrix: &Matrix) -> Result<PcaModel, PcaError> {
    let n = matrix.rows().saturating_sub(1).min(matrix.cols());
    pca_fit(matrix, n)
}

impl PcaModel {
    pub fn num_components(&self) -> usize {
        self.components.rows()
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    /// Model keeping only the leading `r` components.
    pub fn truncated(&self, r: usize) -> PcaModel {
        let r = r.min(self.num_components());
        PcaModel {
            mean: self.mean.clone(),
            components: self.components.select_rows(&(0..r).collect::<Vec<_>>()),
            singular_values: self.singular_values[..r].to_vec(),
            explained_variance: self.explained_variance[..r].to_vec(),
            explained_variance_ratio: self.explained_variance_ratio[..r].to_vec(),
        }
    }

    /// Running sum of the explained-variance ratios.
    pub fn cumulative_ratio(&self) -> Vec<f64> {
        self.explained_variance_ratio
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }

    /// Coordinates of `rows` along the retained components.
    pub fn transform(&self, rows: &Matrix) -> Result<Matrix, PcaError> {
        self.check_width(rows.cols())?;
        let r = self.num_components();
        let mut scores = Matrix::zeros(rows.rows(), r);
        let mut centred = alloc::vec![0.0; self.width()];
        for (i, row) in rows.iter_rows().enumerate() {
            centred.iter_mut().zip(row.iter().zip(&self.mean)).for_each(|(d, (v, m))| *d = v - m);
            for j in 0..r {
                scores[(i, j)] = dot(&centred, self.components.row(j));
            }
        }
        Ok(scores)
    }

    /// Map score-space rows back to the original coordinates.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<Matrix, PcaError> {
        let r = self.num_components();
        if scores.cols() != r {
            return Err(PcaError::DimensionMismatch { expected: r, actual: scores.cols() });
        }
        let mut out = Matrix::zeros(scores.rows(), self.width());
        for i in 0..scores.rows() {
            let target = out.row_mut(i);
            target.copy_from_slice(&self.mean);
            for j in 0..r {
                let s = scores[(i, j)];
                target.iter_mut().zip(self.components.row(j)).for_each(|(t, c)| *t += s * c);
            }
        }
        Ok(out)
    }

    /// Scores and the reconstruction from them.
    pub fn project_reconstruct(&self, rows: &Matrix) -> Result<(Matrix, Matrix), PcaError> {
        let scores = self.transform(rows)?;
        let reconstruction = self.inverse_transform(&scores)?;
        Ok((scores, reconstruction))
    }

    /// Smallest number of leading components whose cumulative ratio reaches
    /// `threshold`.
    pub fn components_for_threshold(&self, threshold: f64) -> Result<usize, PcaError> {
        components_for_threshold(&self.explained_variance_ratio, threshold)
    }

    fn check_width(&self, actual: usize) -> Result<(), PcaError> {
        if actual != self.width() {
            return Err(PcaError::DimensionMismatch { expected: self.width(), actual });
        }
        Ok(())
    }
}

pub fn components_for_threshold(ratios: &[f64], threshold: f64) -> Result<usize, PcaError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(PcaError::InvalidThreshold(threshold));
    }
    let mut cumulative = 0.0;
    for (i, r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative >= threshold {
            return Ok(i + 1);
        }
    }
    Err(PcaError::Unreachable { threshold, reached: cumulative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = Rng::new(seed);
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.next_f64()).collect())
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn collinear_points_have_one_axis() {
        let data = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        let model = pca_fit(&data, 1).unwrap();
        assert!((model.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((model.components[(0, 0)] - h).abs() < 1e-12);
        assert!((model.components[(0, 1)] - h).abs() < 1e-12);
        let (_, recon) = model.project_reconstruct(&data).unwrap();
        assert!(max_abs_diff(&recon, &data) < 1e-10);
    }

    #[test]
    fn full_spectrum_sums_to_one_and_reconstructs() {
        for (rows, cols) in [(10, 4), (6, 15), (8, 8)] {
            let data = random(rows, cols, (rows * cols) as u64);
            let model = pca_fit_full(&data).unwrap();
            let total: f64 = model.explained_variance_ratio.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            let (_, recon) = model.project_reconstruct(&data).unwrap();
            assert!(max_abs_diff(&recon, &data) < 1e-8);
        }
    }

    #[test]
    fn zero_components_reconstruct_the_mean() {
        let data = random(5, 3, 11);
        let model = pca_fit(&data, 0).unwrap();
        let (scores, recon) = model.project_reconstruct(&data).unwrap();
        assert_eq!(scores.cols(), 0);
        for row in recon.iter_rows() {
            assert_eq!(row, model.mean.as_slice());
        }
    }

    #[test]
    fn threshold_counts() {
        assert_eq!(components_for_threshold(&[0.6, 0.3, 0.1], 0.85), Ok(2));
        assert_eq!(components_for_threshold(&[1.0], 0.95), Ok(1));
        assert!(matches!(components_for_threshold(&[0.5, 0.2], 0.9), Err(PcaError::Unreachable { .. })));
        assert!(components_for_threshold(&[1.0], 0.0).is_err());
    }

    #[test]
    fn argument_errors() {
        let data = random(3, 2, 1);
        assert_eq!(pca_fit(&random(1, 2, 1), 1), Err(PcaError::TooFewRows(1)));
        assert!(matches!(pca_fit(&data, 3), Err(PcaError::TooManyComponents { .. })));
        let model = pca_fit(&data, 1).unwrap();
        assert!(matches!(
            model.transform(&Matrix::zeros(1, 3)),
            Err(PcaError::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn duplicated_rows_still_reconstruct() {
        let base = random(4, 6, 21);
        let mut rows: Vec<Vec<f64>> = base.iter_rows().map(|r| r.to_vec()).collect();
        rows.push(rows[1].clone());
        rows.push(rows[1].clone());
        let data = Matrix::from_rows(&rows);
        let model = pca_fit(&data, data.rows().min(data.cols())).unwrap();
        let (_, recon) = model.project_reconstruct(&data).unwrap();
        assert!(max_abs_diff(&recon, &data) < 1e-8);
        for i in 0..model.num_components() {
            for j in 0..model.num_components() {
                let d = dot(model.components.row(i), model.components.row(j));
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((d - target).abs() < 1e-8);
            }
        }
    }
}
