//! Deterministic derivation of independent random streams.
//!
//! Every randomized procedure takes an explicit 64-bit seed and derives one
//! stream per unit of work (restart, bootstrap replicate, simulated
//! participant) from `(seed, index)`. Results are therefore independent of
//! scheduling and of how much parallelism a future version might use.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; a solid 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A sub-seed for unit `index` of the stream family `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(1)))
}

/// An RNG for unit `index` under `seed`; distinct indices get independent
/// ChaCha streams.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
