//! One-sided Jacobi (Hestenes) singular value decomposition.
//!
//! Only singular values and right singular vectors are produced, which is
//! all principal component analysis needs. The sweep order is fixed, so
//! results are bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{dot, Matrix};

const MAX_SWEEPS: usize = 80;
const ORTHOGONALITY_TOL: f64 = 1e-15;
/// Singular values below `NULL_TOL * sigma_max` are treated as exact zeros.
const NULL_TOL: f64 = 1e-12;

/// Singular values (non-increasing) and the matching right singular vectors
/// as rows of a `count x cols` matrix, `count = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct RightSvd {
    pub singular_values: Vec<f64>,
    pub right_vectors: Matrix,
}

/// Orthogonalize the given columns in place; returns the accumulated
/// rotation (as columns) when `track` is set.
fn hestenes(columns: &mut [Vec<f64>], track: bool) -> Option<Vec<Vec<f64>>> {
    let n = columns.len();
    let mut rotation: Option<Vec<Vec<f64>>> = track.then(|| {
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect()
    });

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&columns[i], &columns[i]);
                let beta = dot(&columns[j], &columns[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&columns[i], &columns[j]);
                if gamma.abs() <= ORTHOGONALITY_TOL * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(columns, i, j, c, s);
                if let Some(r) = rotation.as_mut() {
                    rotate(r, i, j, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    rotation
}

fn rotate(columns: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = columns.split_at_mut(j);
    let (ci, cj) = (&mut head[i], &mut tail[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Extend `basis` (orthonormal) with a unit vector orthogonal to it, built
/// from the standard basis vector with the largest residual.
fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..dim {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let proj = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let r = norm(&v);
        if best.as_ref().is_none_or(|(br, _)| r > *br) {
            best = Some((r, v));
        }
    }
    let (r, mut v) = best.expect("dimension must be positive");
    v.iter_mut().for_each(|x| *x /= r);
    v
}

/// Flip the sign so the largest-magnitude entry is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v.get(idx).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Singular values and right singular vectors of `a`. Directions in the
/// null space are completed to an orthonormal basis.
pub fn right_svd(a: &Matrix) -> RightSvd {
    let (rows, cols) = (a.rows(), a.cols());
    let count = rows.min(cols);
    if count == 0 {
        return RightSvd { singular_values: Vec::new(), right_vectors: Matrix::zeros(0, cols) };
    }

    // Each entry: (sigma, right vector or None when it must be completed).
    let mut pairs: Vec<(f64, Option<Vec<f64>>)>;
    if rows >= cols {
        // A V = U S: orthogonalize the columns of A, V accumulates rotations.
        let mut columns: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| a[(r, c)]).collect()).collect();
        let v = hestenes(&mut columns, true).expect("rotation tracked");
        pairs = columns.iter().zip(v).map(|(col, vec)| (norm(col), Some(vec))).collect();
    } else {
        // A^T U = V S: the orthogonalized columns of A^T are V S.
        let mut columns: Vec<Vec<f64>> = a.iter_rows().map(|r| r.to_vec()).collect();
        hestenes(&mut columns, false);
        pairs = columns
            .into_iter()
            .map(|col| {
                let s = norm(&col);
                (s, Some(col))
            })
            .collect();
        for (s, vec) in pairs.iter_mut() {
            if let Some(v) = vec.as_mut() {
                if *s > 0.0 {
                    v.iter_mut().for_each(|x| *x /= *s);
                } else {
                    *vec = None;
                }
            }
        }
    }

    let sigma_max = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    for (s, vec) in pairs.iter_mut() {
        if *s <= NULL_TOL * sigma_max || sigma_max == 0.0 {
            *s = 0.0;
            if rows < cols {
                *vec = None;
            }
        }
    }

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&x, &y| pairs[y].0.total_cmp(&pairs[x].0));

    let mut singular_values = Vec::with_capacity(count);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    for &i in &order {
        singular_values.push(pairs[i].0);
        let mut v = match pairs[i].1.take() {
            Some(v) => v,
            None => complete_basis(&basis, cols),
        };
        canonical_sign(&mut v);
        basis.push(v);
    }

    let mut data = Vec::with_capacity(count * cols);
    basis.iter().for_each(|v| data.extend_from_slice(v));
    RightSvd { singular_values, right_vectors: Matrix::from_vec(count, cols, data) }
}
