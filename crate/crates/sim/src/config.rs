//! JSON experiment configuration.
//!
//! Unknown keys are rejected at every level. Overrides (`key=value`) address
//! fields by dotted path, e.g. `horizon=1000`, `instance.list_size=8` or
//! `variants.0.epsilon=[0.5,1]`; the value is parsed as JSON and falls back
//! to a plain string.

use std::path::{Path, PathBuf};

use dpcascade_core::bounds::ConstantSource;
use dpcascade_core::{PolicyParams, ProblemInstance, ProblemKind, Variant};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// `f(A*, w̄) - f(A_t, w̄)`.
    #[default]
    Pseudo,
    /// `f(A*, w_t) - f(A_t, w_t)`.
    Realized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    #[default]
    Cascade,
    SemiBandit,
}

impl From<InstanceKind> for ProblemKind {
    fn from(k: InstanceKind) -> Self {
        match k {
            InstanceKind::Cascade => ProblemKind::Cascade,
            InstanceKind::SemiBandit => ProblemKind::SemiBandit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// Top `list_size` items at `top`, the rest at `top - gap`.
    TwoLevel { top: f64, gap: f64 },
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub num_items: usize,
    pub list_size: usize,
    #[serde(default)]
    pub kind: InstanceKind,
    pub weights: WeightSpec,
    #[serde(default = "yes")]
    pub require_unique_optimum: bool,
}

impl InstanceSpec {
    pub fn build(&self, horizon: u64) -> Result<ProblemInstance> {
        let kind = self.kind.into();
        let instance = match &self.weights {
            WeightSpec::TwoLevel { top, gap } => {
                ProblemInstance::two_level(self.num_items, self.list_size, *top, *gap, horizon, kind)
            }
            WeightSpec::Fixed(w) => {
                if w.len() != self.num_items {
                    return Err(SimError::Config(format!(
                        "instance.weights has {} entries but num_items is {}",
                        w.len(),
                        self.num_items
                    )));
                }
                ProblemInstance::new(w.clone(), self.list_size, horizon, kind)
            }
        }
        .map_err(|e| SimError::Config(e.to_string()))?;
        if self.require_unique_optimum {
            instance
                .validate_unique_optimum()
                .map_err(|e| SimError::Config(e.to_string()))?;
        }
        Ok(instance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    #[serde(deserialize_with = "variant_name", serialize_with = "variant_name_ser")]
    pub name: Variant,
    #[serde(default = "default_epsilons", deserialize_with = "one_or_many")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub noise_scale: f64,
    #[serde(default)]
    pub dp_radius_per_arm: bool,
    #[serde(default)]
    pub scale_radius: bool,
}

impl VariantSpec {
    pub fn new(name: Variant, epsilon: Vec<f64>) -> Self {
        Self {
            name,
            epsilon,
            delta: default_delta(),
            c1: 1.0,
            noise_scale: 1.0,
            dp_radius_per_arm: false,
            scale_radius: false,
        }
    }

    pub fn params(&self, epsilon: f64) -> PolicyParams {
        PolicyParams {
            epsilon,
            delta: self.delta,
            c1: self.c1,
            noise_scale: self.noise_scale,
            dp_radius_per_arm: self.dp_radius_per_arm,
            scale_radius: self.scale_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub variants: Vec<VariantSpec>,
    pub horizon: u64,
    #[serde(default = "one_usize")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub regret_mode: RegretMode,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Attach upper-bound overlays to the regret CSV.
    #[serde(default)]
    pub overlay: bool,
    /// Write every n-th round (the last round is always written).
    #[serde(default = "one_u64")]
    pub record_every: u64,
    #[serde(default)]
    pub bound_constants: BoundConstants,
    #[serde(default = "default_xi")]
    pub bound_xi: f64,
}

/// Serializable mirror of [`ConstantSource`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundConstants {
    #[default]
    Statement,
    Appendix,
}

impl From<BoundConstants> for ConstantSource {
    fn from(b: BoundConstants) -> Self {
        match b {
            BoundConstants::Statement => ConstantSource::Statement,
            BoundConstants::Appendix => ConstantSource::Appendix,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, overrides and validates a config file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Self = serde_json::from_value(value)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(SimError::Config("repetitions must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(SimError::Config("variants must not be empty".into()));
        }
        if self.record_every == 0 {
            return Err(SimError::Config("record_every must be at least 1".into()));
        }
        self.instance.build(self.horizon)?;
        for v in &self.variants {
            if v.epsilon.is_empty() {
                return Err(SimError::Config(format!("{}: empty epsilon list", v.name)));
            }
            for &eps in &v.epsilon {
                v.params(eps)
                    .validate(v.name)
                    .map_err(|e| SimError::Config(format!("{}: {e}", v.name)))?;
            }
        }
        Ok(())
    }

    pub fn build_instance(&self) -> Result<ProblemInstance> {
        self.instance.build(self.horizon)
    }

    /// The instance a variant runs on. CUCB always plays the semi-bandit
    /// version of the configured weights.
    pub fn instance_for(&self, variant: Variant) -> Result<ProblemInstance> {
        let mut spec = self.instance.clone();
        if variant == Variant::CucbLdpGaussian {
            spec.kind = InstanceKind::SemiBandit;
        }
        spec.build(self.horizon)
    }
}

/// Sets the value at a dotted path inside a JSON document.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SimError::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| SimError::Config(format!("override `{key}`: `{part}` is not an index")))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    SimError::Config(format!("override `{key}`: index {idx} out of range ({len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(SimError::Config(format!("override `{key}`: `{part}` is not a container"))),
        };
    }
    Err(SimError::Config(format!("override `{assignment}` has an empty key")))
}

fn variant_name<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Variant, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(|_| {
        let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
        serde::de::Error::custom(format!("unknown variant `{s}`, expected one of {}", names.join(", ")))
    })
}

fn variant_name_ser<S: serde::Serializer>(v: &Variant, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn default_delta() -> f64 {
    1e-3
}
fn default_epsilons() -> Vec<f64> {
    vec![1.0]
}
fn default_xi() -> f64 {
    0.1
}
