//! Portable pseudo-random streams.
//!
//! Every random decision in the pipeline (train/test shuffles, k-means++
//! seeding, bootstrap draws, SGD ordering, synthetic noise) comes from a
//! xoshiro256** generator whose state is expanded from a 64-bit seed by
//! splitmix64. Independent sub-streams are derived by hashing the parent
//! seed together with integer stream labels, so the same `(seed, labels)`
//! always yields the same sequence regardless of call order.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Top-level stream labels. Each consumer of randomness draws from
/// `Rng::stream(seed, &[LABEL, ...])` with its own label.
pub mod streams {
    pub const SPLIT: u64 = 1;
    pub const KMEANS: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const LINEAR_SVM: u64 = 4;
    pub const RBF_SVM: u64 = 5;
    pub const SYNTH_NOISE: u64 = 6;
    pub const SYNTH_PROBLEMS: u64 = 7;
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One splitmix64 output step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a sub-stream seed from a parent seed and a sequence of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(seed), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

#[derive(Clone, Debug)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { inner: Xoshiro256StarStar::seed_from_u64(seed) }
    }

    /// Generator for the sub-stream `labels` of `seed`.
    pub fn stream(seed: u64, labels: &[u64]) -> Self {
        Self::new(derive_seed(seed, labels))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`, unbiased (Lemire's method).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "empty range");
        let bound = bound as u64;
        let mut product = (self.next_u64() as u128) * (bound as u128);
        let mut low = product as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                product = (self.next_u64() as u128) * (bound as u128);
                low = product as u64;
            }
        }
        (product >> 64) as usize
    }

    /// Standard normal draw (Box-Muller, cosine branch only).
    pub fn standard_normal(&mut self) -> f64 {
        // 1 - u keeps the logarithm argument in (0, 1].
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
