//! Noise mechanisms, the continual-release counter and budget calculators.
//!
//! Every sampled noise value can be multiplied by a `noise_scale` factor.
//! Any factor other than 1 changes the noise distribution the privacy
//! analysis relies on, so the formal guarantee no longer holds.

mod budget;
mod counter;
pub(crate) mod noise;

pub use budget::{composed_laplace_epsilon, gaussian_sigma, PrivacyBudget, COMPOSITION_EPSILON_MAX};
pub use counter::{utility_bound, HybridCounter};
pub use noise::{gaussian_sample, laplace_sample};
