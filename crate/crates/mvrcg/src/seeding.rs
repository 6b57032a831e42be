//! Deterministic seed derivation and seeded RNG construction, so every run is
//! a pure function of its declared seeds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Splitmix64-style mix of a base seed with context tags.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base ^ 0x9e37_79b9_7f4a_7c15;
    for &part in parts {
        state = state.wrapping_add(part).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random permutation of `0..p` from a seed.
pub fn random_permutation(p: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng_from_seed(seed));
    order
}
