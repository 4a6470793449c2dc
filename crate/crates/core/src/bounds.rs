//! Closed-form regret bounds, used as plot overlays and as sanity oracles.
//!
//! Upper bounds are evaluated at a horizon `t`; lower bounds are returned as
//! the coefficient of `ln T`. Natural logarithms throughout.
//!
//! Two upper bounds appear with different constants in their short and long
//! derivations: the Laplace bound's leading factor (4 vs 8) and the CUCB
//! bound's additive constant (π²/3 vs 2π²/3). [`ConstantSource`] picks one.
//! The central-DP bound has an unspecified additive constant that is taken
//! as 0 here.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::env::{ProblemInstance, ProblemKind};
use crate::error::{Error, Result};
use crate::policies::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Central DP cascading UCB.
    Dp,
    /// Local DP, Laplace noise of scale K/ε.
    LdpLaplace,
    /// Local DP, Gaussian noise.
    LdpGaussian,
    /// CUCB under local DP (Gaussian noise).
    Cucb,
}

impl BoundKind {
    /// The upper bound matching a learner, if one is known in closed form.
    pub fn for_variant(variant: Variant) -> Option<Self> {
        match variant {
            Variant::DpHybrid => Some(BoundKind::Dp),
            Variant::LdpLaplace => Some(BoundKind::LdpLaplace),
            Variant::LdpGaussian => Some(BoundKind::LdpGaussian),
            Variant::CucbLdpGaussian => Some(BoundKind::Cucb),
            Variant::NonPrivate | Variant::LdpLaplaceComposed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantSource {
    /// Constants as stated with the theorems.
    #[default]
    Statement,
    /// Constants as they come out of the full derivations.
    Appendix,
}

/// Inputs for the bound evaluators. Fields left `None` are required only by
/// some evaluators; a missing one yields [`Error::Parameter`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub num_items: usize,
    pub list_size: usize,
    /// `Δ_{e,K} = w̄(K) - w̄(e)` for each suboptimal item.
    pub gaps: Vec<f64>,
    /// Smallest positive super-arm reward gap.
    pub delta_min: Option<f64>,
    /// Largest super-arm reward gap.
    pub delta_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// Exponent slack of the central-DP bound.
    pub xi: f64,
    pub c1: f64,
    /// Common weight of the optimal items in the lower-bound instance.
    pub p: Option<f64>,
    /// Weight gap of the lower-bound instance.
    pub gap: Option<f64>,
    /// `f⁻¹(Δ_min)` of the bounded-smoothness function (identity for the
    /// linear oracle).
    pub f_inv_delta_min: Option<f64>,
    /// Number of base arms in the semi-bandit.
    pub m: Option<usize>,
    pub constant_source: ConstantSource,
}

impl BoundParams {
    pub fn new(num_items: usize, list_size: usize) -> Self {
        Self {
            num_items,
            list_size,
            gaps: Vec::new(),
            delta_min: None,
            delta_max: None,
            epsilon: None,
            delta: None,
            xi: 0.1,
            c1: 1.0,
            p: None,
            gap: None,
            f_inv_delta_min: None,
            m: None,
            constant_source: ConstantSource::Statement,
        }
    }

    /// Derives the gap structure from an instance. For semi-bandits the
    /// super-arm gaps are those of the linear reward, and `f⁻¹` is the
    /// identity.
    pub fn from_instance(instance: &ProblemInstance) -> Self {
        let k = instance.list_size();
        let mut sorted = instance.weights().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let kth = sorted[k - 1];
        let mut params = Self::new(instance.num_items(), k);
        params.gaps = sorted[k..].iter().map(|w| kth - w).collect();
        if let Some(&next) = sorted.get(k) {
            // Two-level instances feed the lower bounds directly.
            let top = sorted[0];
            if sorted[..k].iter().all(|&w| w == top) && sorted[k..].iter().all(|&w| w == next) {
                params.p = Some(top);
                params.gap = Some(top - next);
            }
        }
        if instance.kind() == ProblemKind::SemiBandit && k < sorted.len() {
            let best: f64 = sorted[..k].iter().sum();
            let worst: f64 = sorted[sorted.len() - k..].iter().sum();
            let dmin = sorted[k - 1] - sorted[k];
            params.delta_min = Some(dmin);
            params.delta_max = Some(best - worst);
            params.f_inv_delta_min = Some(dmin);
            params.m = Some(instance.num_items());
        }
        params
    }

    pub fn with_privacy(mut self, epsilon: f64, delta: f64) -> Self {
        self.epsilon = Some(epsilon);
        self.delta = Some(delta);
        self
    }

    fn epsilon(&self) -> Result<f64> {
        positive(self.epsilon, "epsilon")
    }

    fn log_delta_term(&self) -> Result<f64> {
        let d = self.delta.ok_or(missing("delta"))?;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Parameter {
                name: "delta",
                reason: "must lie in (0, 1)",
            });
        }
        Ok(libm::log(1.25 / d))
    }

    fn gap_sum(&self, numerator: f64) -> Result<f64> {
        if self.gaps.is_empty() && self.list_size < self.num_items {
            return Err(missing("gaps"));
        }
        if self.gaps.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::Parameter {
                name: "gaps",
                reason: "must be positive (unique optimal action)",
            });
        }
        Ok(self.gaps.iter().map(|g| numerator / g).sum())
    }
}

fn missing(name: &'static str) -> Error {
    Error::Parameter {
        name,
        reason: "required by this bound",
    }
}

fn positive(value: Option<f64>, name: &'static str) -> Result<f64> {
    let v = value.ok_or(missing(name))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Parameter {
            name,
            reason: "must be positive",
        })
    }
}

/// Upper bound on cumulative regret at horizon `t`.
pub fn upper_bound(kind: BoundKind, params: &BoundParams, t: f64) -> Result<f64> {
    let ln_t = libm::log(t);
    let l = params.num_items as f64;
    let k = params.list_size as f64;
    match kind {
        BoundKind::Dp => {
            let eps = params.epsilon()?;
            if !(params.xi > 0.0) {
                return Err(Error::Parameter {
                    name: "xi",
                    reason: "must be positive",
                });
            }
            let inner = libm::pow(params.c1 * l / eps * ln_t, 1.0 + params.xi);
            Ok(params.gap_sum(192.0 * inner)? + 2.0 * PI * PI / 3.0 * l)
        }
        BoundKind::LdpLaplace => {
            let eps = params.epsilon()?;
            let lead = match params.constant_source {
                ConstantSource::Statement => 4.0,
                ConstantSource::Appendix => 8.0,
            };
            let root = libm::sqrt(1.5) + k / eps * libm::sqrt(24.0);
            Ok(params.gap_sum(lead * root * root * ln_t)? + 2.0 * PI * PI / 3.0 * l)
        }
        BoundKind::LdpGaussian => {
            let eps = params.epsilon()?;
            let root = 2.0 * libm::sqrt(1.5) + 8.0 / eps * libm::sqrt(k * params.log_delta_term()?);
            params.gap_sum(2.0 * root * root * ln_t)
        }
        BoundKind::Cucb => {
            let eps = params.epsilon()?;
            let f_inv = positive(params.f_inv_delta_min, "f_inv_delta_min")?;
            let delta_max = params.delta_max.ok_or(missing("delta_max"))?;
            let m = params.m.ok_or(missing("m"))? as f64;
            let constant = match params.constant_source {
                ConstantSource::Statement => PI * PI / 3.0,
                ConstantSource::Appendix => 2.0 * PI * PI / 3.0,
            };
            let lead = 128.0 * k * params.log_delta_term()? * ln_t / ((eps * eps).min(2.0) * f_inv * f_inv);
            Ok((lead + constant + 1.0) * m * delta_max)
        }
    }
}

fn lower_bound_inputs(params: &BoundParams) -> Result<(f64, f64)> {
    let p = params.p.ok_or(missing("p"))?;
    let gap = params.gap.ok_or(missing("gap"))?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter {
            name: "p",
            reason: "must lie in (0, 1)",
        });
    }
    if !(gap > 0.0 && gap < p) {
        return Err(Error::Parameter {
            name: "gap",
            reason: "must lie in (0, p)",
        });
    }
    Ok((p, gap))
}

/// Coefficient of `ln T` in the regret lower bound under ε-local DP.
pub fn lower_bound_ldp(params: &BoundParams) -> Result<f64> {
    let (p, gap) = lower_bound_inputs(params)?;
    let eps = params.epsilon()?;
    let suboptimal = (params.num_items - params.list_size) as f64;
    let numerator = suboptimal * p * libm::pow(1.0 - p, params.list_size as f64);
    let em1 = libm::expm1(eps);
    let denom = 2.0 * libm::exp(2.0 * eps).min(4.0) * em1 * em1 * gap;
    Ok(numerator / denom)
}

/// Coefficient of `ln T` in the regret lower bound under ε-DP: unit
/// constant on the statistical term and 1/200 on the privacy term.
pub fn lower_bound_dp(params: &BoundParams) -> Result<f64> {
    let (p, gap) = lower_bound_inputs(params)?;
    let eps = params.epsilon()?;
    let suboptimal = (params.num_items - params.list_size) as f64;
    let weight = suboptimal * libm::pow(1.0 - p, params.list_size as f64 - 1.0);
    Ok(weight * (1.0 / gap + 1.0 / (200.0 * eps)))
}
