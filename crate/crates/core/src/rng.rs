//! Per-entity random streams.
//!
//! Every consumer (each node, the adversary) owns a ChaCha8 stream keyed by
//! `(seed, stream_id)`. Streams never share state, so the draws an entity sees
//! do not depend on how many other entities exist or on iteration order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for the adversary.
pub const ADVERSARY_STREAM: u64 = 0;

/// Stream id of node `node` (0-based). Node streams start at 1.
pub fn node_stream(node: usize) -> u64 {
    node as u64 + 1
}

#[derive(Clone, Debug)]
pub struct StreamRng(ChaCha8Rng);

impl StreamRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        StreamRng(rng)
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// `true` with probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `[0, upper]` (inclusive).
    #[inline]
    pub fn upto(&mut self, upper: u32) -> u32 {
        self.0.random_range(0..=upper)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

/// Shorthand for [`StreamRng::new`].
pub fn rng_stream(seed: u64, stream_id: u64) -> StreamRng {
    StreamRng::new(seed, stream_id)
}

/// Derives a child seed from a base seed and two indices (used by sweeps to
/// give every (value, repetition) pair its own run seed).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(a);
    rng.set_word_pos(u128::from(b) * 2);
    rng.next_u64()
}
