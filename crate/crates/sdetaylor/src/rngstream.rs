//! Reproducible per-step random streams keyed by `(seed, trial, step)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

pub type StepRng = ChaCha8Rng;

pub fn stream(seed: u64, trial: u64, step: u64) -> StepRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&step.to_le_bytes());
    key[24..].copy_from_slice(b"sdetylr1");
    ChaCha8Rng::from_seed(key)
}

pub fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::of(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| normal(&mut stream(1, 2, 3))).collect();
        let mut r = stream(1, 2, 3);
        let b: f64 = normal(&mut r);
        assert_eq!(a[0], b);
        let c: f64 = normal(&mut stream(1, 2, 4));
        let d: f64 = normal(&mut stream(1, 3, 3));
        let e: f64 = normal(&mut stream(2, 2, 3));
        assert!(b != c && b != d && b != e);
    }
}
