//! Deterministic seed derivation.
//!
//! Every stochastic step in the crate draws from a ChaCha8 stream whose seed
//! is derived from a 64-bit master seed and a role-specific path of integers
//! (for example `[ROLE_FOLDS, repeat, class]`). The path is folded into the
//! master seed with SplitMix64 rounds, so identical `(seed, path)` pairs
//! always produce identical streams regardless of thread scheduling or
//! worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derivation role for per-class shuffles inside fold planning.
pub const ROLE_FOLDS: u64 = 1;
/// Derivation role for coding-matrix generation.
pub const ROLE_MATRIX: u64 = 2;
/// Derivation role for synthetic data used by the oracle suite.
pub const ROLE_ORACLE: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a derivation path into `seed` and returns the mixed 64-bit value.
pub fn mix(seed: u64, path: &[u64]) -> u64 {
    let mut acc = splitmix64(seed);
    for &part in path {
        acc = splitmix64(acc ^ splitmix64(part.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    acc
}

/// ChaCha8 stream for a derivation path under `seed`.
pub fn seeded_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, path))
}
