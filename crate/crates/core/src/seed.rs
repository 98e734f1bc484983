//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit is keyed by a tuple of small integers
//! (function id, instance id, run index, ...). [`split64`] folds such a tuple
//! into one 64-bit seed with the SplitMix64 finalizer:
//!
//! ```text
//! h0 = mix(master)
//! h_{i+1} = mix(h_i ^ (part_i + 0x9E3779B97F4A7C15 * (i + 1)))
//! mix(z): z += 0x9E3779B97F4A7C15
//!         z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!         z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!         z ^ (z >> 31)
//! ```
//!
//! The position-dependent increment makes `split64(s, &[a, b])` differ from
//! `split64(s, &[b, a])`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The generator used for every stochastic component.
pub type Rng = ChaCha8Rng;

/// One SplitMix64 step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `master`, position-sensitively.
pub fn split64(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .enumerate()
        .fold(splitmix64(master), |h, (i, &p)| splitmix64(h ^ p.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1))))
}

/// A generator seeded from `split64(master, parts)`.
pub fn rng_for(master: u64, parts: &[u64]) -> Rng {
    Rng::seed_from_u64(split64(master, parts))
}
