//! Counter-style RNG keying: every random decision is drawn from a stream
//! derived from `(domain, global seed, image id, index)`, so work can be split
//! across threads in any order without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn digest(domain: &str, global: u64, image_id: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    for part in [domain.as_bytes(), image_id.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.update(global.to_le_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// 64-bit key identifying one stream; stored with records for provenance.
pub fn derive_seed(domain: &str, global: u64, image_id: &str, index: u64) -> u64 {
    let d = digest(domain, global, image_id, index);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn keyed_rng(domain: &str, global: u64, image_id: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(domain, global, image_id, index))
}
