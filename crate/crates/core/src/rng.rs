//! Seeded random streams.
//!
//! Every stochastic step uses ChaCha8 keyed with `ChaCha8Rng::seed_from_u64(seed)`.
//! Generated item `i` draws from stream `i` of that key, so its output depends
//! only on `(seed, i)` and not on how many values earlier items consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream 0 of the key derived from `seed`.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of the key derived from `seed`.
pub fn item_stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
