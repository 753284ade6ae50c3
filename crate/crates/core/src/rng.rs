//! Seeded, splittable random streams.
//!
//! Every random consumer in the pipeline draws from its own ChaCha8 stream
//! keyed by the run seed. Streams with different ids never overlap, so the
//! data generator, the Gibbs sampler and the debias chain stay independent
//! and reproducible no matter how many draws each one makes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids used by the CLI pipeline.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const GIBBS: u64 = 1;
    pub const DEBIAS: u64 = 2;
}

/// Returns the generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for replicate `index` of a batch started from `base`.
///
/// SplitMix64 finalizer, so neighbouring replicates get unrelated keys.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
