//! Analytic matrix-multiply performance model for generating benchmark
//! datasets without hardware.
//!
//! Throughput is the device peak scaled by tile-quantization waste in each
//! dimension, a register-blocking factor, and a work-group occupancy factor.
//! Optional log-normal noise is drawn from a per-record random stream, so
//! records can be generated in any order with identical results.

use alloc::vec::Vec;

use crate::config::{KernelConfig, ProblemSize};
use crate::dataset::BenchmarkRecord;
use crate::rng::{streams, Rng};

pub const CANONICAL_SEED: u64 = 42;
pub const CANONICAL_PROBLEMS: usize = 170;
pub const CANONICAL_NOISE: f64 = 0.05;
pub const CANONICAL_PEAK_GFLOPS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub problems: Vec<ProblemSize>,
    pub seed: u64,
    pub noise_sigma: f64,
    pub peak_gflops: f64,
}

/// Fraction of a tiled extent that does useful work: `d / (ceil(d/t) * t)`.
pub fn waste(d: u64, tile: u64) -> f64 {
    d as f64 / (d.div_ceil(tile) * tile) as f64
}

/// Noise-free throughput in GFLOP/s.
pub fn analytic_perf(problem: &ProblemSize, config: &KernelConfig, peak: f64) -> f64 {
    let util_m = waste(problem.m, u64::from(config.row_tile * config.wg_rows));
    let util_n = waste(problem.n, u64::from(config.col_tile * config.wg_cols));
    let util_k = waste(problem.k, u64::from(config.acc));
    // (r*c*a)^0.3 / 8^0.9 written as (r*c*a / 512)^0.3, which is exactly 1
    // at the largest tiles.
    let blocking = f64::from(config.row_tile * config.col_tile * config.acc) / 512.0;
    let reg = libm::pow(blocking, 0.3);
    let occ = (f64::from(config.wg_rows * config.wg_cols) / 64.0).min(1.0);
    // m/n utilizations are multiplied together first so that swapping the
    // row and column roles is exactly symmetric.
    peak * (util_m * util_n) * util_k * reg * occ
}

/// One record per (problem, config) pair, problems in the given order and
/// configs in canonical order.
pub fn generate(spec: &SyntheticSpec) -> Vec<BenchmarkRecord> {
    let configs = KernelConfig::all();
    let mut out = Vec::with_capacity(spec.problems.len() * configs.len());
    for (p, problem) in spec.problems.iter().enumerate() {
        for (c, config) in configs.iter().enumerate() {
            let mut gflops = analytic_perf(problem, config, spec.peak_gflops);
            if spec.noise_sigma > 0.0 {
                let z = Rng::stream(spec.seed, &[streams::SYNTH_NOISE, p as u64, c as u64]).standard_normal();
                gflops *= libm::exp(spec.noise_sigma * z);
            }
            out.push(BenchmarkRecord {
                problem: *problem,
                config: *config,
                runtime_ns: problem.flops() / gflops,
                gflops,
            });
        }
    }
    out
}

/// Candidate dimensions: powers of two up to 4096, their neighbours
/// `2^j +- 1`, and `3 * 2^j`.
pub fn dimension_pool() -> Vec<u64> {
    let mut pool: Vec<u64> = (0..=12).map(|j| 1u64 << j).collect();
    for j in 3..=11 {
        pool.push((1u64 << j) - 1);
        pool.push((1u64 << j) + 1);
    }
    for j in 2..=10 {
        pool.push(3 << j);
    }
    pool.sort_unstable();
    pool.dedup();
    pool
}

/// `count` distinct problem shapes with each dimension drawn uniformly from
/// [`dimension_pool`].
pub fn sample_problems(count: usize, seed: u64) -> Vec<ProblemSize> {
    let pool = dimension_pool();
    let mut rng = Rng::stream(seed, &[streams::SYNTH_PROBLEMS]);
    let mut problems: Vec<ProblemSize> = Vec::with_capacity(count);
    let capacity = pool.len().pow(3);
    while problems.len() < count.min(capacity) {
        let mut dim = || pool[rng.below(pool.len())];
        let candidate = ProblemSize { m: dim(), k: dim(), n: dim() };
        if !problems.contains(&candidate) {
            problems.push(candidate);
        }
    }
    problems
}

/// The reference synthetic dataset used by the test suites.
pub fn canonical_spec() -> SyntheticSpec {
    SyntheticSpec {
        problems: sample_problems(CANONICAL_PROBLEMS, CANONICAL_SEED),
        seed: CANONICAL_SEED,
        noise_sigma: CANONICAL_NOISE,
        peak_gflops: CANONICAL_PEAK_GFLOPS,
    }
}
