//! Seeded randomness: per-check seed derivation and generic point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for `label`, independent of evaluation order.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Uniform sample from the disc of the given radius about the origin.
pub fn complex_in_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    loop {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        if re * re + im * im <= 1.0 {
            return C64::new(re * radius, im * radius);
        }
    }
}

pub fn min_pairwise_distance(points: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            best = best.min((points[a] - points[b]).norm());
        }
    }
    best
}

/// `n` points in the unit disc whose pairwise distances are at least
/// `1e-2` of the disc diameter.
pub fn generic_positions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    const SEPARATION: f64 = 1e-2 * 2.0;
    loop {
        let z: Vec<C64> = (0..n).map(|_| complex_in_disc(rng, 1.0)).collect();
        if min_pairwise_distance(&z) >= SEPARATION {
            return z;
        }
    }
}

/// Pairwise distinct exponents, sampled like [`generic_positions`] but with
/// the given radius.
pub fn generic_exponents<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    generic_positions(n, rng).into_iter().map(|q| q * radius).collect()
}
