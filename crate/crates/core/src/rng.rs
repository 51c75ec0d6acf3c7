//! Seeded random streams.
//!
//! Every trial owns its own stream, derived from the experiment's base seed and
//! the trial index with [`mix64`]. Streams never depend on scheduling, so
//! results are identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Steele, Lea and Flood).
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(base + (index + 1) * GOLDEN_GAMMA)`, i.e. the
/// `index`-th output of a SplitMix64 generator started at `base`.
#[inline]
pub fn mix64(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream_for(base_seed: u64, index: u64) -> RandomStream {
    RandomStream::seed_from_u64(mix64(base_seed, index))
}
