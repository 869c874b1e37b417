//! Seed derivation. Every random stream in the crate is keyed by a tuple of
//! integers mixed through SplitMix64, so any single draw can be reproduced
//! without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes an ordered list of integers into one 64-bit seed.
pub fn derive(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Stream tags keep derived seeds for different purposes apart.
pub(crate) const TAG_SAMPLE: u64 = 1;
pub(crate) const TAG_TRAIN_INIT: u64 = 2;
pub(crate) const TAG_EPOCH: u64 = 3;
pub(crate) const TAG_SELECT: u64 = 4;
pub(crate) const TAG_REPEAT: u64 = 5;
pub(crate) const TAG_TRAIN_RUN: u64 = 6;
