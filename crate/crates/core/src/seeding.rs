//! Seeded random streams. Every consumer derives its generator from a master
//! seed and a stream id, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two-level stream id, e.g. (iteration, particle).
pub fn stream_id(major: u64, minor: u64) -> u64 {
    (major << 32) ^ minor
}
