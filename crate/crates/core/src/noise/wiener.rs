//! Counter-based Wiener increments.
//!
//! A leaf increment is a pure function of `(seed, mode, leaf index)`. A step
//! spanning `2^level` leaves sums them along a fixed binary tree, so the
//! increment of a coarse step equals the sum of its two half steps bit for bit.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Brownian increments for a family of independent modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WienerPath {
    seed: u64,
    leaf_dt: f64,
    level: u32,
}

impl WienerPath {
    /// Increments over steps of length `dt` with no finer structure.
    pub fn new(seed: u64, dt: f64) -> Self {
        Self::nested(seed, dt, 0)
    }

    /// Steps of length `leaf_dt * 2^level` built from leaves of length `leaf_dt`.
    pub fn nested(seed: u64, leaf_dt: f64, level: u32) -> Self {
        Self {
            seed,
            leaf_dt,
            level,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.leaf_dt * (1u64 << self.level) as f64
    }

    /// Same leaves, steps twice as long.
    pub fn coarsened(&self) -> Self {
        Self {
            level: self.level + 1,
            ..*self
        }
    }

    /// Increment of mode `k` over step `step`.
    pub fn increment(&self, k: usize, step: u64) -> f64 {
        let width = 1u64 << self.level;
        self.tree_sum(k, step * width, width)
    }

    /// Increments of modes `0..modes` over step `step`.
    pub fn increments(&self, modes: usize, step: u64) -> Vec<f64> {
        (0..modes).map(|k| self.increment(k, step)).collect()
    }

    fn tree_sum(&self, k: usize, start: u64, width: u64) -> f64 {
        if width == 1 {
            self.leaf(k, start)
        } else {
            let half = width / 2;
            self.tree_sum(k, start, half) + self.tree_sum(k, start + half, half)
        }
    }

    fn leaf(&self, k: usize, index: u64) -> f64 {
        if self.leaf_dt == 0.0 {
            return 0.0;
        }
        self.leaf_dt.sqrt() * standard_normal(self.seed, k as u64, index)
    }
}

/// Box-Muller normal from the ChaCha keystream at a fixed counter position.
pub fn standard_normal(seed: u64, stream: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * 4);
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Decorrelated child seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
