//! Deterministic pair sampling.
//!
//! Pair `k` of a batch seeded with `S` draws from its own xoshiro256**
//! generator whose state is four consecutive splitmix64 outputs started at
//! `S ^ k`. Indices are drawn as `next_u64() % n`, redrawing on collision.
//! Any implementation following these rules reproduces the same pairs.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

/// Attempts at finding a cross-class pair before giving up on it.
pub const CROSS_CLASS_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Any two distinct entries.
    #[default]
    Uniform,
    /// Two distinct entries with different labels.
    CrossClass,
}

impl Pairing {
    pub fn as_str(self) -> &'static str {
        match self {
            Pairing::Uniform => "uniform",
            Pairing::CrossClass => "cross_class",
        }
    }
}

/// Generator seeded from `seed` via splitmix64.
pub fn seeded_rng(seed: u64) -> Xoshiro256StarStar {
    let mut sm = SplitMix64::seed_from_u64(seed);
    let mut state = [0u8; 32];
    for chunk in state.chunks_exact_mut(8) {
        chunk.copy_from_slice(&sm.next_u64().to_le_bytes());
    }
    Xoshiro256StarStar::from_seed(state)
}

/// Generator for pair `k` of a batch seeded with `seed`.
pub fn pair_rng(seed: u64, k: u64) -> Xoshiro256StarStar {
    seeded_rng(seed ^ k)
}

pub fn draw_index(rng: &mut impl RngCore, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Two distinct indices in `[0, n)`; `n` must be at least 2.
pub fn draw_distinct(rng: &mut impl RngCore, n: usize) -> (usize, usize) {
    assert!(n >= 2, "need at least two entries to form a pair");
    let a = draw_index(rng, n);
    let mut b = draw_index(rng, n);
    while b == a {
        b = draw_index(rng, n);
    }
    (a, b)
}

/// Ordered pair `(a, b)` of entry indices for one mix, or `None` when
/// cross-class sampling found no pair with different labels in
/// [`CROSS_CLASS_ATTEMPTS`] draws.
pub fn sample_pair(rng: &mut impl RngCore, labels: &[usize], pairing: Pairing) -> Option<(usize, usize)> {
    match pairing {
        Pairing::Uniform => Some(draw_distinct(rng, labels.len())),
        Pairing::CrossClass => (0..CROSS_CLASS_ATTEMPTS)
            .map(|_| draw_distinct(rng, labels.len()))
            .find(|&(a, b)| labels[a] != labels[b]),
    }
}
