//! The single seeded random stream a simulation consumes in event order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Bernoulli draw. Degenerate probabilities (`<= 0`, `>= 1`) consume no randomness.
    pub fn chance(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.0.random::<f64>() < p
        }
    }

    /// Uniform index in `0..n`; `n` must be non-zero.
    pub fn pick(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }
}
