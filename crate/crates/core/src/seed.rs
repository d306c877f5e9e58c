//! Deterministic seed derivation.
//!
//! Every random object (parity system, sample set, generated instance) gets
//! its own seed, computed from the master seed and the coordinates of the
//! object within a run. Objects are then drawn from a ChaCha8 stream keyed on
//! that seed. ChaCha is a counter-mode generator, so results depend only on
//! the derived seed and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every sampled object.
pub type Rng = ChaCha8Rng;

/// What a derived seed is used for. Distinct purposes never share streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Parity systems of one replicate inside an XOR_K call.
    Replicate = 0x7265_706c,
    /// The single parity system of an XOR_Binary call.
    Binary = 0x6269_6e61,
    /// Sample sets for sample average approximation.
    Saa = 0x7361_6100,
    /// Instance generators.
    Generate = 0x6765_6e00,
    /// Restarts of the SAA local search.
    LocalSearch = 0x6c73_6561,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `mix(master, purpose, k, replicate, trial)`.
pub fn derive_seed(master: u64, purpose: Purpose, k: u64, replicate: u64, trial: u64) -> u64 {
    let mut h = mix64(master);
    for word in [purpose as u64, k, replicate, trial] {
        h = mix64(h ^ word);
    }
    h
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed source for one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    pub master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn seed(&self, purpose: Purpose, k: usize, replicate: usize, trial: usize) -> u64 {
        derive_seed(self.master, purpose, k as u64, replicate as u64, trial as u64)
    }

    pub fn rng(&self, purpose: Purpose, k: usize, replicate: usize, trial: usize) -> Rng {
        rng_from_seed(self.seed(purpose, k, replicate, trial))
    }
}
