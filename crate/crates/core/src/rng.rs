//! Reproducible random-number streams keyed by `(seed, stream_id)`.
//!
//! Each stream is a ChaCha8 keystream whose key is derived from `seed`
//! and whose 64-bit stream selector is `stream_id`. Distinct selectors
//! address disjoint keystreams, so any number of replicates and particles
//! can draw in parallel and still reproduce bit-for-bit.
//!
//! Layout used throughout the crate: particle `i` of replicate `r` draws
//! from `stream_id = r · 2³² + i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{require, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    /// Base stream of replicate `r`: `stream_id = r · 2³²`.
    pub fn replicate(seed: u64, replicate: u32) -> Self {
        Self::new(seed, stream_id(replicate, 0))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream at `stream_id + offset`, e.g. particle `offset` of
    /// the replicate whose base stream is `self`.
    pub fn substream(&self, offset: u32) -> Self {
        Self::new(self.seed, self.stream_id.wrapping_add(u64::from(offset)))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `count` independent centered normals with the given variance.
    pub fn gaussian_increment(&mut self, count: usize, variance: f64) -> Result<Vec<f64>> {
        require(variance > 0.0 && variance.is_finite(), "variance", "positive and finite", variance)?;
        let sd = variance.sqrt();
        Ok((0..count).map(|_| sd * self.standard_normal()).collect())
    }
}

/// Stream selector for particle `particle` of replicate `replicate`.
pub fn stream_id(replicate: u32, particle: u32) -> u64 {
    (u64::from(replicate) << 32) | u64::from(particle)
}

/// Derives an independent 64-bit seed for sub-experiment `index` of a run
/// seeded with `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
