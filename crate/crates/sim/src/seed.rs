//! Keyed derivation of per-run random streams.
//!
//! A stream depends only on `(seed, label)`, never on execution order, so
//! grid cells can run in any order or concurrently and still draw the same
//! numbers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Label of the stream that drives the environment's Bernoulli draws.
pub const ENVIRONMENT: &str = "environment";

pub fn derive_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"dpcascade/v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// Seed of repetition `index` in a grid.
pub fn repetition_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}
