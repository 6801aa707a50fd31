//! Deterministic seed derivation.
//!
//! A run has one base seed. Every component and every Monte-Carlo trial gets
//! its own ChaCha stream derived by hashing `(base, tag, index)`, so results
//! never depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// A node in the seed-derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(base: u64) -> Self {
        Self {
            key: splitmix64(base),
        }
    }

    /// Child stream for a named component.
    pub fn derive(&self, tag: &str) -> Self {
        Self {
            key: splitmix64(self.key ^ fnv1a(tag)),
        }
    }

    /// Child stream for an integer index (trial, grid point, ...).
    pub fn index(&self, i: u64) -> Self {
        Self {
            key: splitmix64(self.key.rotate_left(17) ^ splitmix64(i)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    /// Generator for Monte-Carlo trial `i`.
    pub fn trial(&self, i: u64) -> ChaCha8Rng {
        self.index(i).rng()
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}
