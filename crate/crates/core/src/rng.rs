//! Seeded random streams.
//!
//! All stochastic output in the crate is driven by [`ChaCha8Rng`] seeded with a
//! 64-bit integer; derived streams (per mode, per run) use [`derive_seed`].

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finaliser applied to `seed ^ salt`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = (seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
