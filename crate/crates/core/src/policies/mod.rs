//! UCB learners for cascading bandits and combinatorial semi-bandits.
//!
//! Every variant runs the same loop: compute per-arm indices
//! ([`Policy::compute_indices`]), pick a list ([`Policy::select_action`]),
//! then fold the observed prefix into the per-arm state ([`Policy::update`]).
//! Variants differ only in how observations are noised and in the
//! confidence radius added to the estimate.
//!
//! With `t` the current round and `T` the arm's observation count, the
//! indices are (natural logarithms throughout):
//!
//! | variant | index |
//! |---|---|
//! | `non_private` | `ŵ + √(1.5 ln t / T)` |
//! | `dp_hybrid` | `ŵ + √(1.5 ln t / T) + 3 c₁ L ln^1.5(n) ln t / (ε T)` |
//! | `ldp_laplace` | `ŵ + √(1.5 ln t / T) + (K/ε) √(24 ln t / T)` |
//! | `ldp_gaussian` | `ŵ + √(1.5 ln t / T) + σ √(2 ln(2t³) / T)` |
//! | `ldp_laplace_composed` | `ŵ + (4/ε) √(6K ln(e + ε/δ) ln t / T) + √(3 ln t / (2T))` |
//! | `cucb_ldp_gaussian` | `û + √(3 ln t / (2T)) + (2/ε) √(2K ln(1.25/δ) ln t / T)` |

mod oracle;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore};

pub use oracle::{check_super_arm, SuperArmOracle, TopKOracle};

use crate::env::{ItemId, Observation, ProblemInstance, ProblemKind, RoundRealization};
use crate::error::{Error, Result};
use crate::privacy::noise::{gaussian_unchecked, laplace_unchecked};
use crate::privacy::{composed_laplace_epsilon, gaussian_sigma, HybridCounter, PrivacyBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    NonPrivate,
    DpHybrid,
    LdpLaplace,
    LdpGaussian,
    LdpLaplaceComposed,
    CucbLdpGaussian,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::NonPrivate,
        Variant::DpHybrid,
        Variant::LdpLaplace,
        Variant::LdpGaussian,
        Variant::LdpLaplaceComposed,
        Variant::CucbLdpGaussian,
    ];

    /// Stable configuration string.
    pub fn name(self) -> &'static str {
        match self {
            Variant::NonPrivate => "non_private",
            Variant::DpHybrid => "dp_hybrid",
            Variant::LdpLaplace => "ldp_laplace",
            Variant::LdpGaussian => "ldp_gaussian",
            Variant::LdpLaplaceComposed => "ldp_laplace_composed",
            Variant::CucbLdpGaussian => "cucb_ldp_gaussian",
        }
    }

    pub fn is_private(self) -> bool {
        self != Variant::NonPrivate
    }

    fn needs_delta(self) -> bool {
        matches!(
            self,
            Variant::LdpGaussian | Variant::LdpLaplaceComposed | Variant::CucbLdpGaussian
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or(Error::Config("unknown variant name"))
    }
}

/// Per-variant parameters. List size, item count and horizon come from the
/// [`ProblemInstance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Constant of the continual-counter utility bound (`dp_hybrid`).
    pub c1: f64,
    /// Multiplies every sampled noise value. 0 disables noise; anything
    /// other than 1 voids the privacy guarantee.
    pub noise_scale: f64,
    /// Use `ln^1.5 T(e)` instead of `ln^1.5 n` in the `dp_hybrid` radius.
    pub dp_radius_per_arm: bool,
    /// Also multiply the privacy part of the confidence radius by
    /// `noise_scale`.
    pub scale_radius: bool,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            delta: 1e-3,
            c1: 1.0,
            noise_scale: 1.0,
            dp_radius_per_arm: false,
            scale_radius: false,
        }
    }
}

impl PolicyParams {
    pub fn validate(&self, variant: Variant) -> Result<()> {
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config("noise_scale must be nonnegative and finite"));
        }
        if !variant.is_private() {
            return Ok(());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be positive and finite"));
        }
        if variant.needs_delta() && !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1) for this variant"));
        }
        if variant == Variant::DpHybrid && !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Config("c1 must be positive and finite"));
        }
        Ok(())
    }

    fn budget(&self) -> Result<PrivacyBudget> {
        PrivacyBudget::new(self.epsilon, self.delta).map_err(|_| Error::Config("invalid privacy budget"))
    }
}

/// How observations are perturbed before they reach the estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Perturbation {
    None,
    Laplace(f64),
    Gaussian(f64),
    /// Central DP: observations go through per-arm counters.
    Counter,
}

/// Learner state: per-arm counts, estimates and noise state.
#[derive(Debug)]
pub struct Policy {
    variant: Variant,
    params: PolicyParams,
    list_size: usize,
    horizon: u64,
    counts: Vec<u64>,
    estimates: Vec<f64>,
    /// Sum of collected (randomized) rewards; unused with counters.
    sums: Vec<f64>,
    counters: Vec<HybridCounter>,
    round: u64,
    perturbation: Perturbation,
    /// Variant-specific constant multiplying the privacy radius.
    radius_coef: f64,
    oracle: Box<dyn SuperArmOracle>,
}

impl Policy {
    /// Builds the state from the initial full-feedback draw `w0`: every arm
    /// is observed once through the variant's noising path.
    pub fn initialize<R: Rng>(
        instance: &ProblemInstance,
        variant: Variant,
        params: PolicyParams,
        w0: &RoundRealization,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate(variant)?;
        if variant == Variant::CucbLdpGaussian && instance.kind() != ProblemKind::SemiBandit {
            return Err(Error::Config("cucb_ldp_gaussian needs a semi-bandit instance"));
        }
        let num_items = instance.num_items();
        if w0.len() != num_items {
            return Err(Error::Config("initial realization has the wrong length"));
        }
        let k = instance.list_size();
        let kf = k as f64;
        let scale = params.noise_scale;
        let radius_scale = if params.scale_radius { scale } else { 1.0 };

        let (perturbation, radius_coef) = match variant {
            Variant::NonPrivate => (Perturbation::None, 0.0),
            Variant::DpHybrid => {
                let c = 3.0 * params.c1 * num_items as f64 / params.epsilon;
                (Perturbation::Counter, c * radius_scale)
            }
            Variant::LdpLaplace => {
                let b = kf / params.epsilon;
                (Perturbation::Laplace(b * scale), b * libm::sqrt(24.0) * radius_scale)
            }
            Variant::LdpGaussian | Variant::CucbLdpGaussian => {
                let sigma = gaussian_sigma(&params.budget()?, k)?;
                let coef = if variant == Variant::LdpGaussian { sigma } else { 2.0 * sigma };
                (Perturbation::Gaussian(sigma * scale), coef * radius_scale)
            }
            Variant::LdpLaplaceComposed => {
                let eps_prime = composed_laplace_epsilon(&params.budget()?, k)?;
                let e = core::f64::consts::E;
                let coef = 4.0 / params.epsilon
                    * libm::sqrt(6.0 * kf * libm::log(e + params.epsilon / params.delta));
                (Perturbation::Laplace(scale / eps_prime), coef * radius_scale)
            }
        };

        let mut policy = Self {
            variant,
            params,
            list_size: k,
            horizon: instance.horizon(),
            counts: alloc::vec![1; num_items],
            estimates: Vec::with_capacity(num_items),
            sums: Vec::new(),
            counters: Vec::new(),
            round: 1,
            perturbation,
            radius_coef,
            oracle: Box::new(TopKOracle),
        };

        if perturbation == Perturbation::Counter {
            let eps_prime = params.epsilon / num_items as f64;
            // One initial observation plus at most one per round.
            let capacity = instance.horizon() + 1;
            for e in 0..num_items {
                let mut counter = HybridCounter::new(eps_prime, capacity, scale)?;
                counter.insert(reward_value(w0.values()[e]), rng)?;
                policy.estimates.push(counter.query()?);
                policy.counters.push(counter);
            }
        } else {
            for &w in w0.values() {
                let est = policy.randomize_response(reward_value(w), rng);
                policy.estimates.push(est);
                policy.sums.push(est);
            }
        }
        Ok(policy)
    }

    /// Replaces the super-arm oracle used by `cucb_ldp_gaussian`.
    pub fn with_oracle(mut self, oracle: Box<dyn SuperArmOracle>) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// Observation counts `T_{t-1}(e)`, indexed by item.
    pub fn pull_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Current (possibly noisy, never clipped) estimates `ŵ(e)`.
    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    /// Per-arm continual counters (`dp_hybrid` only; empty otherwise).
    pub fn counters(&self) -> &[HybridCounter] {
        &self.counters
    }

    /// The round whose indices are computed next (starts at 1).
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn num_items(&self) -> usize {
        self.counts.len()
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Statistical plus privacy radius for one arm at the current round.
    pub fn radius(&self, count: u64) -> f64 {
        self.radius_at(self.round as f64, count)
    }

    /// Radius for an arm observed `count` times, evaluated at round `t`.
    pub fn radius_at(&self, t: f64, count: u64) -> f64 {
        let ln_t = libm::log(t);
        let n = count as f64;
        match self.variant {
            Variant::NonPrivate => libm::sqrt(1.5 * ln_t / n),
            Variant::DpHybrid => {
                let ln_len = if self.params.dp_radius_per_arm {
                    libm::log(n)
                } else {
                    libm::log(self.horizon as f64)
                };
                libm::sqrt(1.5 * ln_t / n) + self.radius_coef * ln_len * libm::sqrt(ln_len) * ln_t / n
            }
            Variant::LdpLaplace => libm::sqrt(1.5 * ln_t / n) + self.radius_coef * libm::sqrt(ln_t / n),
            Variant::LdpGaussian => {
                libm::sqrt(1.5 * ln_t / n)
                    + self.radius_coef * libm::sqrt(2.0 * libm::log(2.0 * t * t * t) / n)
            }
            Variant::LdpLaplaceComposed => {
                self.radius_coef * libm::sqrt(ln_t / n) + libm::sqrt(3.0 * ln_t / (2.0 * n))
            }
            Variant::CucbLdpGaussian => {
                libm::sqrt(3.0 * ln_t / (2.0 * n)) + self.radius_coef * libm::sqrt(ln_t / n)
            }
        }
    }

    /// Upper confidence indices for every arm at the current round.
    pub fn compute_indices(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.counts.len());
        self.compute_indices_into(&mut out);
        out
    }

    /// Like [`compute_indices`](Self::compute_indices), reusing `out`.
    pub fn compute_indices_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.estimates
                .iter()
                .zip(&self.counts)
                .map(|(&w, &n)| w + self.radius(n)),
        );
    }

    /// Chooses the list (cascade variants) or super arm (CUCB) for the
    /// current round.
    pub fn select_action<R: Rng>(&mut self, indices: &[f64], rng: &mut R) -> Result<Vec<ItemId>> {
        if self.variant == Variant::CucbLdpGaussian {
            let set = self.oracle.select(indices, self.list_size, rng as &mut dyn RngCore);
            check_super_arm(&set, self.counts.len(), self.list_size)?;
            Ok(set)
        } else {
            Ok(select_action(indices, self.list_size))
        }
    }

    /// Folds one round of observations into the state and advances the
    /// round counter.
    pub fn update<R: Rng>(&mut self, observed: &[Observation], rng: &mut R) -> Result<()> {
        for obs in observed {
            let e = obs.item.index();
            let prev = match self.counts.get(e) {
                Some(0) => return Err(Error::StateCorruption("arm was never initialized")),
                Some(&n) => n,
                None => return Err(Error::StateCorruption("feedback names an unknown arm")),
            };
            let next = prev + 1;
            self.counts[e] = next;
            if self.perturbation == Perturbation::Counter {
                let counter = &mut self.counters[e];
                counter.insert(obs.reward(), rng)?;
                self.estimates[e] = counter.query()? / next as f64;
            } else {
                let noisy = self.randomize_response(obs.reward(), rng);
                // Same value as the running-mean recurrence, but ties between
                // arms with equal histories stay exact.
                self.sums[e] += noisy;
                self.estimates[e] = self.sums[e] / next as f64;
            }
        }
        self.round += 1;
        Ok(())
    }

    /// Local randomizer applied to a single reward before it is collected.
    ///
    /// In a deployment this runs on the user's side; only its output
    /// reaches the learner.
    pub fn randomize_response<R: Rng>(&self, reward: f64, rng: &mut R) -> f64 {
        match self.perturbation {
            Perturbation::Laplace(b) if b > 0.0 => reward + laplace_unchecked(b, rng),
            Perturbation::Gaussian(s) if s > 0.0 => reward + gaussian_unchecked(s, rng),
            _ => reward,
        }
    }
}

fn reward_value(attracted: bool) -> f64 {
    if attracted {
        1.0
    } else {
        0.0
    }
}

/// The `k` arms with the largest indices, in descending index order; ties go
/// to the lower id.
pub fn select_action(indices: &[f64], k: usize) -> Vec<ItemId> {
    let mut order: Vec<usize> = (0..indices.len()).collect();
    let cmp = |&a: &usize, &b: &usize| indices[b].total_cmp(&indices[a]).then(a.cmp(&b));
    let k = k.min(indices.len());
    if k < order.len() && k > 0 {
        order.select_nth_unstable_by(k - 1, cmp);
    }
    order.truncate(k);
    order.sort_unstable_by(cmp);
    order.into_iter().map(ItemId::from_index).collect()
}
