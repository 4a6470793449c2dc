use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::noise::laplace_unchecked;
use crate::error::{Error, Result};

/// Continual-release counter over a bounded stream of values in `[0, 1]`.
///
/// This is the binary-tree mechanism with a known maximum stream length
/// (`capacity`). Position `t` closes the dyadic node at level
/// `trailing_zeros(t)`; the released prefix sum after `n` insertions is the
/// sum of the noisy nodes at the set bits of `n`, so it carries
/// `popcount(n) <= floor(log2 n) + 1` independent Laplace terms.
///
/// Each stream element lands in one node per level, so the budget `ε'` is
/// split evenly over `bit_length(capacity)` levels and every node gets
/// `Lap(levels / ε')` noise.
#[derive(Debug, Clone)]
pub struct HybridCounter {
    epsilon_prime: f64,
    capacity: u64,
    node_scale: f64,
    count: u64,
    exact_sum: f64,
    partial: Vec<f64>,
    noisy: Vec<f64>,
    released: f64,
}

impl HybridCounter {
    /// `noise_scale` multiplies every node noise; 0 disables noise.
    pub fn new(epsilon_prime: f64, capacity: u64, noise_scale: f64) -> Result<Self> {
        if !(epsilon_prime > 0.0 && epsilon_prime.is_finite()) {
            return Err(Error::Parameter {
                name: "epsilon_prime",
                reason: "must be positive and finite",
            });
        }
        if capacity == 0 {
            return Err(Error::Parameter {
                name: "capacity",
                reason: "must be at least 1",
            });
        }
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::Parameter {
                name: "noise_scale",
                reason: "must be nonnegative and finite",
            });
        }
        let levels = 64 - capacity.leading_zeros();
        Ok(Self {
            epsilon_prime,
            capacity,
            node_scale: noise_scale * levels as f64 / epsilon_prime,
            count: 0,
            exact_sum: 0.0,
            partial: vec![0.0; levels as usize],
            noisy: vec![0.0; levels as usize],
            released: 0.0,
        })
    }

    /// Appends one stream element, drawing noise for the node it closes.
    pub fn insert<R: Rng + ?Sized>(&mut self, value: f64, rng: &mut R) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Sensitivity(value));
        }
        if self.count == self.capacity {
            return Err(Error::CounterCapacity(self.capacity));
        }
        let t = self.count + 1;
        let level = t.trailing_zeros() as usize;
        let mut node = value;
        for j in 0..level {
            node += self.partial[j];
            self.partial[j] = 0.0;
            self.noisy[j] = 0.0;
        }
        self.partial[level] = node;
        self.noisy[level] = if self.node_scale > 0.0 {
            node + laplace_unchecked(self.node_scale, rng)
        } else {
            node
        };
        self.count = t;
        self.exact_sum += value;
        self.released = (0..self.noisy.len())
            .filter(|&j| t >> j & 1 == 1)
            .map(|j| self.noisy[j])
            .sum();
        Ok(())
    }

    /// Noisy prefix sum. Repeated calls without an insertion return the
    /// same value.
    pub fn query(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyCounter);
        }
        Ok(self.released)
    }

    pub fn inserted_count(&self) -> u64 {
        self.count
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    /// Scale of the Laplace noise attached to each tree node.
    pub fn node_noise_scale(&self) -> f64 {
        self.node_scale
    }

    /// Number of Laplace terms in the current release.
    pub fn active_noise_terms(&self) -> u32 {
        self.count.count_ones()
    }

    pub fn exact_sum(&self) -> f64 {
        self.exact_sum
    }

    /// Released value minus the true prefix sum.
    pub fn noise(&self) -> Result<f64> {
        Ok(self.query()? - self.exact_sum)
    }
}

/// High-probability noise magnitude of the continual counter after `n`
/// insertions: `c1 · ln(n)^1.5 · ln(1/γ) / ε'`.
pub fn utility_bound(c1: f64, n: u64, gamma: f64, epsilon_prime: f64) -> f64 {
    let ln_n = libm::log(n as f64);
    c1 * ln_n * libm::sqrt(ln_n) * libm::log(1.0 / gamma) / epsilon_prime
}
