use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

use super::select_action;
use crate::env::ItemId;
use crate::error::{Error, Result};

/// Maps per-arm indices to a super arm of at most `max_size` arms.
///
/// An (α, β)-approximation oracle returns, with probability at least β, a
/// super arm whose reward under `indices` is within factor α of the best.
pub trait SuperArmOracle: fmt::Debug + Send {
    fn select(&mut self, indices: &[f64], max_size: usize, rng: &mut dyn RngCore) -> Vec<ItemId>;
}

/// Exact oracle for linear super-arm reward `Σ u_i`: the top `max_size`
/// indices (α = β = 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct TopKOracle;

impl SuperArmOracle for TopKOracle {
    fn select(&mut self, indices: &[f64], max_size: usize, _rng: &mut dyn RngCore) -> Vec<ItemId> {
        select_action(indices, max_size)
    }
}

/// Rejects super arms that are empty, too large, repeat an arm or name an
/// unknown arm.
pub fn check_super_arm(set: &[ItemId], num_arms: usize, max_size: usize) -> Result<()> {
    if set.is_empty() {
        return Err(Error::OracleContract("empty super arm"));
    }
    if set.len() > max_size {
        return Err(Error::OracleContract("super arm larger than K"));
    }
    for (i, e) in set.iter().enumerate() {
        if e.index() >= num_arms {
            return Err(Error::OracleContract("unknown arm"));
        }
        if set[..i].contains(e) {
            return Err(Error::OracleContract("repeated arm"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::items;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Top-K with probability β, otherwise the K worst arms.
    #[derive(Debug)]
    struct Flaky {
        beta: f64,
    }

    impl SuperArmOracle for Flaky {
        fn select(&mut self, indices: &[f64], k: usize, rng: &mut dyn RngCore) -> Vec<ItemId> {
            if rng.random::<f64>() < self.beta {
                select_action(indices, k)
            } else {
                let neg: Vec<f64> = indices.iter().map(|x| -x).collect();
                select_action(&neg, k)
            }
        }
    }

    #[test]
    fn linear_oracle_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut set = TopKOracle.select(&[3.0, 1.0, 2.0], 2, &mut rng);
        set.sort();
        assert_eq!(set, items(&[1, 3]));
        let mut all = TopKOracle.select(&[0.1, 0.4, 0.2, 0.3], 4, &mut rng);
        all.sort();
        assert_eq!(all, items(&[1, 2, 3, 4]));
    }

    #[test]
    fn approximate_oracle_success_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let indices = [0.9, 0.1, 0.5, 0.7, 0.3];
        let best = select_action(&indices, 2);
        let mut oracle = Flaky { beta: 0.7 };
        let calls = 10_000;
        let hits = (0..calls)
            .filter(|_| oracle.select(&indices, 2, &mut rng) == best)
            .count();
        let rate = hits as f64 / calls as f64;
        assert!((rate - 0.7).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn contract_check() {
        assert!(check_super_arm(&items(&[1, 2]), 3, 2).is_ok());
        assert!(check_super_arm(&[], 3, 2).is_err());
        assert!(check_super_arm(&items(&[1, 2, 3]), 3, 2).is_err());
        assert!(check_super_arm(&items(&[2, 2]), 3, 2).is_err());
        assert!(check_super_arm(&items(&[4]), 3, 2).is_err());
    }
}
