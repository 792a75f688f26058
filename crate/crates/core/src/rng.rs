//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng`, a counter-based generator with a 64-bit seed
//! interface). Sub-streams are derived by mixing the master seed with a
//! list of tags (role, replication index, method index, ...) through the
//! SplitMix64 finalizer, so independent pieces of an experiment never share
//! a stream and results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in metadata files next to generated data.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), seeds mixed with SplitMix64";

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a sequence of tags.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(master), |acc, &t| {
        splitmix64(acc ^ splitmix64(t))
    })
}

pub fn stream(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(master: u64, tags: &[u64]) -> Rng {
    stream(derive_seed(master, tags))
}

/// Stable numeric tag for a string label (FNV-1a).
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
