//! Seeding discipline for reproducible ensembles.
//!
//! Every randomized routine takes either a `&mut SimRng` or a 64-bit seed.
//! Ensemble member `i` of a run seeded with `seed` draws from stream `i` of
//! the ChaCha8 generator keyed by `seed`, so members are independent of each
//! other and of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a child seed, used where an API takes a seed rather than a generator.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream).next_u64()
}
