//! Seed handling shared by every sampled experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for draw `index` under `seed`.
///
/// Each draw owns its own ChaCha stream, so results do not depend on how
/// draws are split across worker threads, and a larger budget only appends
/// draws to a smaller one.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
