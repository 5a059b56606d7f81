//! Seed expansion. Every random draw in the toolkit comes from a ChaCha stream
//! selected by `(seed, stream)`, so entry `k` of a dataset is reproducible
//! without generating entries `0..k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent sub-streams for distinct purposes of one entry.
pub mod purpose {
    pub const SCENE: u64 = 0;
    pub const GEOMETRY: u64 = 1;
    pub const NOISE_HI: u64 = 2;
    pub const NOISE_LO: u64 = 3;
    pub const JITTER: u64 = 4;
}

/// Stream id for `purpose` of item `index`.
pub fn stream_id(index: u64, purpose: u64) -> u64 {
    index.wrapping_mul(8).wrapping_add(purpose)
}
