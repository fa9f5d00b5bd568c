//! Seed plumbing. Every random draw in a trial comes from one ChaCha8 seed,
//! split into independent streams by purpose.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Stream reserved for weight initialisation.
pub const INIT_STREAM: u64 = 0;

/// Stream used to build the batches of epoch `epoch_index` (0-based).
pub fn epoch_stream(epoch_index: usize) -> u64 {
    1 + epoch_index as u64
}

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable 64-bit seed for the `index`-th repetition of experiment `name`.
pub fn derive_seed(name: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(name.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_be_bytes());
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().unwrap())
}
