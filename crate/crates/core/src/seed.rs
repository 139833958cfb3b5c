//! Per-trial seed derivation: a root seed and a counter give an independent stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::oracle::mix64;

pub fn derive(root: u64, index: u64) -> u64 {
    mix64(root ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(root: u64, index: u64) -> ChaCha8Rng {
    rng(derive(root, index))
}
