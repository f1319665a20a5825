//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit value derived from the master seed and a path of tags. The mixing
//! rule folds each tag into the running state with SplitMix64:
//!
//! ```text
//! h_0 = splitmix64(master)
//! h_{i+1} = splitmix64(h_i ^ splitmix64(tag_i.wrapping_add(GOLDEN)))
//! ```
//!
//! Distinct paths give statistically independent generators, and the same
//! path always gives the same generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Tag for the source (shared hidden variable) stream of a run.
pub const SOURCE: u64 = 0x534F_5552_4345;
/// Tag for station A's private stream of a run.
pub const STATION_A: u64 = 0x0053_544E_5F41;
/// Tag for station B's private stream of a run.
pub const STATION_B: u64 = 0x0053_544E_5F42;
/// Tag for drawing a random hidden-variable model from a master seed.
pub const MODEL: u64 = 0x004D_4F44_454C;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` along `path`.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, &tag| {
        splitmix64(h ^ splitmix64(tag.wrapping_add(GOLDEN)))
    })
}

/// Generator for the stream identified by `(master, path)`.
pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}
