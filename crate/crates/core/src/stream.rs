//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha`), whose
//! output is specified bit-for-bit and does not depend on the platform.
//! Independent substreams are derived from a 64-bit root seed, a purpose
//! label and an index by hashing them with SHA-256 into a 256-bit ChaCha seed,
//! so different purposes (rotations, carriers, channel noise) never share
//! state even when they use the same secret key.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// The pinned generator.
pub type Stream = ChaCha20Rng;

const DOMAIN: &[u8] = b"latentmark/stream/v1";

/// Derives the substream `(seed, label, index)`.
pub fn substream(seed: u64, label: &str, index: u64) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update(index.to_le_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(digest)
}

/// Shorthand for a root stream used directly by a command or test.
pub fn root(seed: u64) -> Stream {
    substream(seed, "root", 0)
}
