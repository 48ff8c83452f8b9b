//! Random streams.
//!
//! Splitting rule: the stream for `(seed, tag, index)` is `ChaCha8Rng` seeded
//! with `seed` and positioned on stream `splitmix64(splitmix64(tag) ^ index)`.
//! `tag` separates experiments and roles (paths, noise, CTMC) that share a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod tags {
    pub const PATHS: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const CTMC: u64 = 3;
    pub const FROZEN: u64 = 4;
    pub const REFINE: u64 = 5;
    pub const CHECKS: u64 = 6;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, tag: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(splitmix64(tag) ^ index));
    rng
}
