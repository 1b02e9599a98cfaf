//! Counter-based seed derivation.
//!
//! Trial `i` of a run seeded with `seed` uses `derive_seed(seed, i)`, which is
//! the `(i + 1)`-th output of a SplitMix64 stream started at `seed`. Any trial
//! can therefore be replayed on its own, and results do not depend on how
//! trials are scheduled across threads.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
