//! Seed derivation.
//!
//! One user-facing seed drives the whole pipeline. Every stage derives its own
//! independent substream by hashing `(root, tag, index)`, so adding RNG draws
//! to one stage never perturbs another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from a root seed, a domain tag, and an index.
pub fn derive(root: u64, tag: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update([0u8]);
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// A deterministic RNG for the given substream.
pub fn rng(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, tag, index))
}
