//! Seed derivation and the portable categorical sampler.
//!
//! All randomness in a run flows from one top-level seed. Each stage gets its
//! own stream, `derive_seed(seed, stage)`, computed as the first eight bytes
//! (little endian) of `SHA-256(seed.to_le_bytes() || stage.as_bytes())`.
//!
//! Streams are `ChaCha8Rng::seed_from_u64(stream_seed)`. A categorical draw
//! over non-negative integer weights `w[0..n]` with total `W > 0` takes one
//! `next_u64()`, forms `u = (x >> 11) * 2^-53` in `[0, 1)`, sets
//! `r = floor(u * W)` and returns the first index whose cumulative weight
//! exceeds `r` (inverse CDF in index order).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub type StageRng = ChaCha8Rng;

pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stage_rng(seed: u64, stage: &str) -> StageRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stage))
}

pub fn seeded_rng(seed: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit_interval(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw over integer weights. Returns `None` when every weight is
/// zero.
pub fn draw_categorical(rng: &mut impl RngCore, weights: &[u64]) -> Option<usize> {
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let r = (unit_interval(rng) * total as f64).floor() as u64;
    let r = r.min(total - 1);
    let mut cumulative = 0u64;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if r < cumulative {
            return Some(i);
        }
    }
    unreachable!("cumulative weight reaches total")
}

/// Hex SHA-256 over the canonical JSON form of `value`.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("fingerprinted values serialize");
    hex::encode(Sha256::digest(json))
}
