//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Independent streams are derived from a master seed with
//! [`derive_seed`], so a trial, a restart or a batch can be addressed by index
//! and reproduced without replaying the draws that precede it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream rule: `mix(master + (stream + 1) * 0x9E3779B97F4A7C15)`.
///
/// Used for trial index -> trial seed, restart index -> restart seed, and the
/// named per-trial streams in [`streams`].
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Named substreams used inside one trial.
pub mod streams {
    pub const MODEL: u64 = 0x4d4f_4445_4c00_0000;
    pub const MASK: u64 = 0x4d41_534b_0000_0000;
    pub const CORRUPTION: u64 = 0x434f_5252_0000_0000;
    pub const CONDITIONS: u64 = 0x434f_4e44_0000_0000;
    pub const CERTIFICATE: u64 = 0x4345_5254_0000_0000;
}
