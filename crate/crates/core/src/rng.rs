//! Counter-style random streams: one ChaCha stream per work item.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream `index` of the generator seeded with `seed`. The same `(seed, index)`
/// pair yields the same draws regardless of which thread consumes it.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed for a named purpose, so auxiliary draws
/// (bootstrap, test data) never reuse the particle streams.
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
