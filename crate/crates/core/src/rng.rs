//! Portable seeded randomness.
//!
//! Every random choice in the crate goes through [`SeededRng`], which is
//! ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`. Derived operations are
//! fixed here so that selections are reproducible across platforms:
//!
//! * `below(n)`: draw `u64` words, reject any word `>= 2^64 - (2^64 mod n)`,
//!   return `word mod n`.
//! * `uniform()`: `(word >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `sample_distinct(pool, k)`: partial Fisher–Yates over a copy of `pool`;
//!   step `i` swaps position `i` with `i + below(len - i)`. The first `k`
//!   positions are returned in draw order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let w = self.next_u64();
            if w <= zone {
                return (w % n) as usize;
            }
        }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// `k` distinct elements of `pool`, uniformly over all `k`-subsets.
    pub fn sample_distinct(&mut self, pool: &[usize], k: usize) -> Vec<usize> {
        assert!(k <= pool.len(), "sample of {k} from pool of {}", pool.len());
        let mut scratch = pool.to_vec();
        for i in 0..k {
            let j = i + self.below(scratch.len() - i);
            scratch.swap(i, j);
        }
        scratch.truncate(k);
        scratch
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed for one cell of an experiment grid.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}
