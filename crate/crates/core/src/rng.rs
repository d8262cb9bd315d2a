//! Seeded random streams.
//!
//! Every stochastic routine takes a `u64` seed. Independent consumers of the
//! same seed are separated by a tag hashed into the seed, and repeated trials
//! (GW rounding, restarts) each read their own ChaCha stream selected by the
//! trial index. Results therefore do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags for the consumers that share one user-facing seed.
pub mod tag {
    pub const INIT: u64 = 0x494e_4954;
    pub const ROUNDING: u64 = 0x524f_554e;
    pub const DIRECTION: u64 = 0x4449_5245;
    pub const RESTART: u64 = 0x5245_5354;
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix(seed ^ mix(tag))
}

pub fn from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
