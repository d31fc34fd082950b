//! Seeded random streams.
//!
//! Every Monte Carlo unit of work (a null replicate, a subsample batch, a
//! power replicate) draws from its own stream derived from the master seed
//! and a path of integer tags, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

// Tags for the top-level derivation paths.
pub(crate) const TAG_COPULA: u64 = 0xC0;
pub(crate) const TAG_SUBSAMPLE: u64 = 0x5B;
pub(crate) const TAG_NULL: u64 = 0x9E;
pub(crate) const TAG_POWER: u64 = 0x90;
pub(crate) const TAG_ORACLE: u64 = 0x0A;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `tags` into `master`, one splitmix64 round per tag.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(master), |acc, &t| {
        splitmix64(acc ^ splitmix64(t))
    })
}

pub fn stream(master: u64, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(master, tags))
}
