//! Counter-based random streams.
//!
//! The value at position `i` of stream `s` under seed `k` is word pair
//! `(2i, 2i+1)` of the ChaCha8 keystream with key derived from `k` and
//! stream id `s`. Sequential reads and random access give identical values,
//! so results never depend on how work is split across workers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Sequential reader over one keyed stream.
pub struct CounterStream {
    rng: ChaCha8Rng,
}

impl CounterStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        CounterStream { rng }
    }

    /// Positions the stream so the next draw is the value at `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(2 * index as u128);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        open01(self.next_u64())
    }
}

/// The value at `index` of stream `stream` under `seed`, uniform on (0, 1).
pub fn uniform_at(seed: u64, stream: u64, index: u64) -> f64 {
    let mut s = CounterStream::new(seed, stream);
    s.seek(index);
    s.next_open01()
}

/// Maps 52 random bits to the midpoint grid of (0, 1); never returns 0 or 1.
pub fn open01(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a path of tags
/// (experiment, window, replicate, ...).
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |acc, &t| mix(acc ^ mix(t)))
}
