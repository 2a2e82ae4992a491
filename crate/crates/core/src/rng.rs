//! Seedable Gaussian increments.

// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic stream of standard normal draws.
///
/// Two streams built from the same `(seed, stream)` pair produce identical
/// sequences. Streams are not meant to be shared between simulations; derive a
/// new one per consumer with [`RandomStream::substream`].
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            counter: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of normal draws taken so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.counter += 1;
        StandardNormal.sample(&mut self.rng)
    }

    /// Brownian increment with variance `dt`.
    pub fn wiener_increment(&mut self, dt: f64) -> f64 {
        dt.sqrt() * self.standard_normal()
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomStream::new(7);
        let mut b = RandomStream::new(7);
        let xa: Vec<f64> = (0..100).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..100).map(|_| b.standard_normal()).collect();
        assert_eq!(xa, xb);
        assert_eq!(a.counter(), 100);
    }

    #[test]
    fn substreams_differ() {
        let mut a = RandomStream::substream(7, 0);
        let mut b = RandomStream::substream(7, 1);
        assert_ne!(a.standard_normal(), b.standard_normal());
    }

    #[test]
    fn moments_are_standard() {
        let mut s = RandomStream::new(1);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }
}
