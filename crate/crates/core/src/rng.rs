//! Seeded random streams.
//!
//! Every trial of an experiment draws from its own ChaCha8 stream selected by
//! `(master_seed, trial_index)`, so results do not depend on how trials are
//! scheduled across workers.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic pseudo-random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent substream `index` of `master_seed`. ChaCha supports 2^64
    /// non-overlapping streams per key.
    pub fn substream(master_seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(index);
        SimRng(inner)
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
