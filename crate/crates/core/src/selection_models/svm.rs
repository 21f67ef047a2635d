//! One-vs-rest support vector machines.
//!
//! The linear machine minimizes the L2-regularized hinge loss with Pegasos
//! subgradient steps over a seeded example order. The RBF machine solves the
//! C-SVC dual with SMO using second-order working-set selection; it has no
//! random choices.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{dot, squared_distance, Matrix};
use crate::rng::{streams, Rng};

/// Per-class linear scorer: `w . x + b`. `None` for classes absent from
/// training, which never win.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearSvm {
    pub weights: Vec<Option<Vec<f64>>>,
    pub biases: Vec<f64>,
}

fn binary_targets(labels: &[usize], class: usize) -> Vec<f64> {
    labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect()
}

fn argmax_scores(scores: impl Iterator<Item = Option<f64>>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (c, s) in scores.enumerate() {
        if let Some(s) = s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
    }
    best.map_or(0, |(c, _)| c)
}

impl LinearSvm {
    pub fn fit(features: &Matrix, labels: &[usize], n_classes: usize, c: f64, epochs: usize, seed: u64) -> LinearSvm {
        let n = features.rows();
        let dim = features.cols();
        let lambda = 1.0 / (c * n as f64);
        let mut weights = Vec::with_capacity(n_classes);
        let mut biases = Vec::with_capacity(n_classes);
        for class in 0..n_classes {
            if !labels.contains(&class) {
                weights.push(None);
                biases.push(0.0);
                continue;
            }
            let y = binary_targets(labels, class);
            // Bias is learned as an extra, regularized, constant-1 feature.
            let mut w = vec![0.0; dim + 1];
            let mut rng = Rng::stream(seed, &[streams::LINEAR_SVM, class as u64]);
            let mut order: Vec<usize> = (0..n).collect();
            let mut t = 0usize;
            for _ in 0..epochs {
                rng.shuffle(&mut order);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let x = features.row(i);
                    let margin = y[i] * (dot(&w[..dim], x) + w[dim]);
                    let shrink = 1.0 - eta * lambda;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        w[..dim].iter_mut().zip(x).for_each(|(v, xi)| *v += eta * y[i] * xi);
                        w[dim] += eta * y[i];
                    }
                }
            }
            biases.push(w[dim]);
            w.truncate(dim);
            weights.push(Some(w));
        }
        LinearSvm { weights, biases }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax_scores(self.weights.iter().zip(&self.biases).map(|(w, b)| w.as_ref().map(|w| dot(w, x) + b)))
    }
}

/// One binary RBF machine: `sum_i coef_i K(sv_i, x) - rho`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinaryMachine {
    pub support: Matrix,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RbfSvm {
    pub gamma: f64,
    pub machines: Vec<Option<BinaryMachine>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoSettings {
    pub c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

const TAU: f64 = 1e-12;

/// Solve the binary C-SVC dual for targets `y` in {-1, +1} over kernel
/// matrix `k` (row-major `n x n`). Returns `(alpha, rho)`.
fn smo(k: &[f64], y: &[f64], settings: &SmoSettings) -> (Vec<f64>, f64) {
    let n = y.len();
    let c = settings.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let at_upper = |a: f64| a >= c;
    let at_lower = |a: f64| a <= 0.0;

    for _ in 0..settings.max_iterations {
        // i: maximal violating candidate in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let up = if y[t] > 0.0 { !at_upper(alpha[t]) } else { !at_lower(alpha[t]) };
            if up && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };

        // j: second-order choice in I_low.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best_obj = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let low = if y[t] > 0.0 { !at_lower(alpha[t]) } else { !at_upper(alpha[t]) };
            if !low {
                continue;
            }
            let yg = y[t] * grad[t];
            if yg > gmax2 {
                gmax2 = yg;
            }
            let diff = gmax + yg;
            if diff > 0.0 {
                let mut a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(diff * diff) / a;
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < settings.tolerance {
            break;
        }
        let Some(j) = j_sel else { break };

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = k[i * n + i] + k[j * n + j] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[i * n + i] + k[j * n + j] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Offset: average over free vectors, else the midpoint of the bounds.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if at_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    (alpha, rho)
}

pub fn rbf_kernel(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    libm::exp(-gamma * squared_distance(a, b))
}

impl RbfSvm {
    pub fn fit(features: &Matrix, labels: &[usize], n_classes: usize, gamma: f64, settings: &SmoSettings) -> RbfSvm {
        let n = features.rows();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rbf_kernel(gamma, features.row(i), features.row(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let machines = (0..n_classes)
            .map(|class| {
                if !labels.contains(&class) {
                    return None;
                }
                let y = binary_targets(labels, class);
                let (alpha, rho) = smo(&k, &y, settings);
                let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
                Some(BinaryMachine {
                    support: features.select_rows(&support),
                    coef: support.iter().map(|&i| alpha[i] * y[i]).collect(),
                    rho,
                })
            })
            .collect();
        RbfSvm { gamma, machines }
    }

    pub fn decision(&self, machine: &BinaryMachine, x: &[f64]) -> f64 {
        machine.support.iter_rows().zip(&machine.coef).map(|(sv, c)| c * rbf_kernel(self.gamma, sv, x)).sum::<f64>()
            - machine.rho
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax_scores(self.machines.iter().map(|m| m.as_ref().map(|m| self.decision(m, x))))
    }
}
