//! Seed derivation for reproducible, schedule-independent experiments.
//!
//! Every replication owns an RNG stream derived from `(seed, indices...)`,
//! so results are identical no matter how work is distributed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with stream indices into an independent child seed.
pub fn derive_seed(seed: u64, indices: &[u64]) -> u64 {
    let mut state = splitmix64(seed ^ 0x6a09_e667_f3bc_c908);
    for &ix in indices {
        state = splitmix64(state ^ splitmix64(ix.wrapping_add(1)));
    }
    state
}

/// A ChaCha stream keyed by `(seed, indices...)`.
pub fn stream(seed: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, indices))
}
