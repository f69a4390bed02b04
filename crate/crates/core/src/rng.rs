//! Seeded randomness for splits.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`, a counter-based
//! stream cipher) keyed through `SeedableRng::seed_from_u64`. Bounded draws
//! use the multiply-high reduction `(u64 * bound) >> 64` with no rejection
//! step, and shuffles are a descending Fisher-Yates pass. Together these pin
//! every split to the seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SplitRng(ChaCha8Rng);

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.0.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
