//! Seeded random streams. Every consumer gets its own ChaCha stream derived
//! from the user seed and a fixed purpose tag, so adding randomness in one
//! phase never shifts the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const COARSENING: u64 = 1;
pub(crate) const INITIAL: u64 = 2;
pub(crate) const FLOWS: u64 = 3;

pub(crate) fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) ^ index);
    rng
}
