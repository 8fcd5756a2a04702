//! Seed derivation and the crate-wide random number generator.
//!
//! Every stochastic component (synthesis noise, dataset parameters, splits,
//! weight initialization, shuffling, dropout) draws from a [`ChaCha8Rng`]
//! seeded through [`derive_seed`]. ChaCha8 output is specified bit-for-bit,
//! so synthetic datasets and trained weights reproduce across platforms.
//!
//! A child seed is `splitmix64(root ^ fnv1a64(label) ^ splitmix64(index))`:
//! the label names the stream ("split", "init", "shuffle", ...) and the
//! index selects a run or an example within it.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Derives the seed of stream `label`, item `index`, from a root seed.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    splitmix64(root ^ fnv1a64(label) ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
