//! Cascading-bandit and semi-bandit environments.
//!
//! Items carry 1-based ids everywhere in the public surface ([`ItemId`]);
//! weights are stored 0-based internally.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// 1-based identifier of a base item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(u32);

impl ItemId {
    /// Returns `None` for id 0.
    pub fn new(id: u32) -> Option<Self> {
        (id > 0).then_some(Self(id))
    }

    /// Item id for a 0-based storage index.
    pub fn from_index(index: usize) -> Self {
        Self(index as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based storage index.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Builds a list of item ids from raw 1-based ids.
///
/// Panics on id 0; intended for literals in tests and examples.
pub fn items(ids: &[u32]) -> Vec<ItemId> {
    ids.iter()
        .map(|&id| ItemId::new(id).expect("item ids are 1-based"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Ordered list, user clicks the first attractive item.
    Cascade,
    /// Every chosen arm is observed; reward is linear in the chosen weights.
    SemiBandit,
}

/// One round's Bernoulli draws, one per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRealization {
    values: Vec<bool>,
}

impl RoundRealization {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    /// Convenience constructor from 0/1 integers.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            values: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn get(&self, item: ItemId) -> bool {
        self.values[item.index()]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Position of the first attractive item in a cascade list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Click {
    /// 1-based list position.
    At(usize),
    /// No item in the list attracted the user.
    None,
}

/// A single observed (item, reward) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub item: ItemId,
    pub attracted: bool,
}

impl Observation {
    pub fn new(item: ItemId, attracted: bool) -> Self {
        Self { item, attracted }
    }

    pub fn reward(&self) -> f64 {
        if self.attracted {
            1.0
        } else {
            0.0
        }
    }
}

/// Feedback from one cascade round.
///
/// `observed` covers positions `1..=min(C_t, K)`: zeros before the click and
/// a one at the click position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackRecord {
    pub action: Vec<ItemId>,
    pub click: Click,
    pub observed: Vec<Observation>,
}

/// A validated bandit instance together with its optimal action.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    weights: Vec<f64>,
    list_size: usize,
    horizon: u64,
    kind: ProblemKind,
    optimal: Vec<ItemId>,
    optimal_reward: f64,
}

impl ProblemInstance {
    pub fn new(weights: Vec<f64>, list_size: usize, horizon: u64, kind: ProblemKind) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Instance("at least one item is required"));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Instance("weights must lie in [0, 1]"));
        }
        if list_size == 0 || list_size > weights.len() {
            return Err(Error::Instance("list size must satisfy 1 <= K <= L"));
        }
        if horizon == 0 {
            return Err(Error::Instance("horizon must be at least 1"));
        }
        let optimal = top_k_by_weight(&weights, list_size);
        let optimal_reward = reward_of(kind, &optimal, &weights);
        Ok(Self {
            weights,
            list_size,
            horizon,
            kind,
            optimal,
            optimal_reward,
        })
    }

    /// Two-level instance: the first `list_size` items have weight `top`, the
    /// rest `top - gap`.
    pub fn two_level(
        num_items: usize,
        list_size: usize,
        top: f64,
        gap: f64,
        horizon: u64,
        kind: ProblemKind,
    ) -> Result<Self> {
        if !(gap > 0.0 && gap < top) {
            return Err(Error::Parameter {
                name: "gap",
                reason: "must lie in (0, top)",
            });
        }
        let weights = (0..num_items)
            .map(|e| if e < list_size { top } else { top - gap })
            .collect();
        Self::new(weights, list_size, horizon, kind)
    }

    /// Checks that the K-th largest weight strictly exceeds the (K+1)-th.
    pub fn validate_unique_optimum(&self) -> Result<()> {
        if self.list_size == self.weights.len() {
            return Ok(());
        }
        let mut sorted = self.weights.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted[self.list_size - 1] > sorted[self.list_size] {
            Ok(())
        } else {
            Err(Error::Instance("optimal action is not unique"))
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, item: ItemId) -> f64 {
        self.weights[item.index()]
    }

    pub fn num_items(&self) -> usize {
        self.weights.len()
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Top-K items by weight, descending, ties by lower id.
    pub fn optimal_action(&self) -> &[ItemId] {
        &self.optimal
    }

    pub fn optimal_reward(&self) -> f64 {
        self.optimal_reward
    }

    /// Checks ids are in range and distinct, and that the length is between
    /// 1 and K.
    pub fn validate_action(&self, action: &[ItemId]) -> Result<()> {
        if action.is_empty() || action.len() > self.list_size {
            return Err(Error::InvalidAction("action length must be in 1..=K"));
        }
        check_items(action, self.weights.len())
    }

    /// Draws one Bernoulli realization.
    pub fn sample_round<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundRealization {
        sample_round(&self.weights, rng)
    }

    /// Expected reward of `action` under this instance's reward model:
    /// `1 - prod(1 - w)` for cascades, `sum(w)` for semi-bandits.
    pub fn expected_reward(&self, action: &[ItemId]) -> Result<f64> {
        self.validate_action(action)?;
        Ok(reward_of(self.kind, action, &self.weights))
    }

    /// Pseudo-regret `f(A*, w̄) - f(A, w̄)`.
    pub fn per_round_regret(&self, action: &[ItemId]) -> Result<f64> {
        let r = self.expected_reward(action)?;
        Ok((self.optimal_reward - r).max(0.0))
    }

    /// Realized regret `f(A*, w_t) - f(A, w_t)`. May be negative.
    pub fn realized_regret(&self, action: &[ItemId], realization: &RoundRealization) -> Result<f64> {
        self.validate_action(action)?;
        let eval = |a: &[ItemId]| -> f64 {
            match self.kind {
                ProblemKind::Cascade => {
                    if a.iter().any(|&e| realization.get(e)) {
                        1.0
                    } else {
                        0.0
                    }
                }
                ProblemKind::SemiBandit => a.iter().filter(|&&e| realization.get(e)).count() as f64,
            }
        };
        Ok(eval(&self.optimal) - eval(action))
    }

    /// Full per-arm feedback for a semi-bandit round.
    pub fn semibandit_feedback(
        &self,
        realization: &RoundRealization,
        action: &[ItemId],
    ) -> Result<Vec<Observation>> {
        if self.kind != ProblemKind::SemiBandit {
            return Err(Error::KindMismatch { expected: "semi-bandit" });
        }
        self.validate_action(action)?;
        Ok(action
            .iter()
            .map(|&e| Observation::new(e, realization.get(e)))
            .collect())
    }
}

fn reward_of(kind: ProblemKind, action: &[ItemId], weights: &[f64]) -> f64 {
    match kind {
        ProblemKind::Cascade => cascade_reward(action, weights),
        ProblemKind::SemiBandit => action.iter().map(|e| weights[e.index()]).sum(),
    }
}

fn cascade_reward(action: &[ItemId], weights: &[f64]) -> f64 {
    let miss: f64 = action.iter().map(|e| 1.0 - weights[e.index()]).product();
    1.0 - miss
}

fn check_items(action: &[ItemId], num_items: usize) -> Result<()> {
    for (i, e) in action.iter().enumerate() {
        if e.index() >= num_items {
            return Err(Error::InvalidAction("item id out of range"));
        }
        if action[..i].contains(e) {
            return Err(Error::InvalidAction("duplicate item id"));
        }
    }
    Ok(())
}

fn top_k_by_weight(weights: &[f64], k: usize) -> Vec<ItemId> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.into_iter().map(ItemId::from_index).collect()
}

/// Draws `w_t(e) ~ Bernoulli(w̄(e))` independently for every item.
pub fn sample_round<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> RoundRealization {
    RoundRealization {
        values: weights.iter().map(|&w| rng.random::<f64>() < w).collect(),
    }
}

/// Cascade feedback: the user scans `action` from the top and stops at the
/// first attractive item.
pub fn observe_click(realization: &RoundRealization, action: &[ItemId]) -> Result<FeedbackRecord> {
    if action.is_empty() {
        return Err(Error::InvalidAction("empty action"));
    }
    check_items(action, realization.len())?;
    let mut observed = Vec::with_capacity(action.len());
    let mut click = Click::None;
    for (pos, &item) in action.iter().enumerate() {
        let attracted = realization.get(item);
        observed.push(Observation::new(item, attracted));
        if attracted {
            click = Click::At(pos + 1);
            break;
        }
    }
    Ok(FeedbackRecord {
        action: action.to_vec(),
        click,
        observed,
    })
}

/// Cascade reward `f(A, w) = 1 - prod_k (1 - w(a_k))`.
pub fn expected_reward(action: &[ItemId], weights: &[f64]) -> Result<f64> {
    if action.is_empty() {
        return Err(Error::InvalidAction("empty action"));
    }
    check_items(action, weights.len())?;
    Ok(cascade_reward(action, weights))
}
