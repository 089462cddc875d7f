//! Seed splitting.
//!
//! Every random stream in a run is derived from one root seed. A child seed is
//! obtained by folding a sequence of integer tags into the root with the
//! SplitMix64 finalizer:
//!
//! ```text
//! h_0 = root
//! h_{i+1} = mix(h_i ^ mix(tag_i + 0x9E3779B97F4A7C15))
//! ```
//!
//! Tags name the purpose of a stream (see the `TAG_*` constants) followed by
//! indices such as vehicle, slot, or iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_RUN: u64 = 1;
pub const TAG_PATHS: u64 = 2;
pub const TAG_DATA: u64 = 3;
pub const TAG_PSO: u64 = 4;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` and a tag path.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(root, |h, &tag| mix(h ^ mix(tag.wrapping_add(GOLDEN))))
}

/// Seeded generator for a tag path.
pub fn rng_for(root: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tags))
}
