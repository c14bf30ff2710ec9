//! Keyed seed derivation so every random stream is a pure function of the
//! master seed and the coordinates of the thing it randomizes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform value in `[0, 1)` determined by the key alone.
pub fn unit(base: u64, parts: &[u64]) -> f64 {
    (derive(base, parts) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn rng(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, parts))
}

// Domain tags keep streams for different purposes apart.
pub(crate) const TAG_CFP: u64 = 0xCF;
pub(crate) const TAG_CTP: u64 = 0xC7;
pub(crate) const TAG_MASK: u64 = 0x3A5C;
pub(crate) const TAG_SYNTH: u64 = 0x5E;
