//! Cascading bandits and combinatorial semi-bandits under differential
//! privacy and local differential privacy.
//!
//! The crate is `no_std` (with `alloc`) and holds the algorithmic pieces:
//!
//! - [`env`]: problem instances, click feedback, rewards and regret.
//! - [`privacy`]: Laplace and Gaussian samplers, the binary-tree continual
//!   counter and the privacy-budget calculators.
//! - [`policies`]: the UCB learners (non-private, central DP, three local DP
//!   variants and CUCB under local DP) behind one [`policies::Policy`] type.
//! - [`bounds`]: closed-form upper and lower regret bounds.
//!
//! All randomness is taken from caller-supplied [`rand::Rng`] sources, so a
//! run is fully determined by the seeds of those sources.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod bounds;
pub mod env;
pub mod error;
pub mod policies;
pub mod privacy;

pub use env::{Click, FeedbackRecord, ItemId, Observation, ProblemInstance, ProblemKind, RoundRealization};
pub use error::{Error, Result};
pub use policies::{Policy, PolicyParams, Variant};
pub use privacy::{HybridCounter, PrivacyBudget};
