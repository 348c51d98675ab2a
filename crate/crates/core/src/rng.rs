//! Seeded randomness helpers.
//!
//! Every sampling routine takes a caller-owned RNG. Experiments derive one
//! independent stream per trial so results do not depend on scheduling.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as DetRng;

/// RNG seeded from a 64-bit value.
pub fn from_seed(seed: u64) -> DetRng {
    DetRng::seed_from_u64(seed)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under master seed `seed`.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(stream)).wrapping_add(index))
}

/// Stable 64-bit tag for a label, used as a stream id.
pub fn label(s: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
