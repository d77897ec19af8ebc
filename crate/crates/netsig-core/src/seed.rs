//! Derivation of every random stream from a single run seed.
//!
//! A sub-seed is `mix(mix(parent ^ stream_tag) + index)`, where `mix` is the
//! SplitMix64 finalizer. Streams are:
//!
//! | stream        | index            | consumer                         |
//! |---------------|------------------|----------------------------------|
//! | `Synthetic`   | 0                | synthetic data generator         |
//! | `Folds`       | 0                | cross-validation fold plan       |
//! | `Stability`   | fold (or 0)      | parent seed of one stability run |
//! | `Draw`        | draw number      | one half-subsample               |
//!
//! Each stream is fed to a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Synthetic = 1,
    Folds = 2,
    Stability = 3,
    Draw = 4,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, stream: Stream, index: u64) -> u64 {
    let tag = (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    mix(mix(parent ^ tag).wrapping_add(index))
}

pub fn rng_for(parent: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, stream, index))
}
