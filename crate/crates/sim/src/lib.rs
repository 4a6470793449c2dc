//! Experiment harness and command-line tool for private cascading bandits.
//!
//! The learners, privacy mechanisms and bounds live in [`dpcascade_core`];
//! this crate adds configuration files, seeded grid execution, CSV output
//! and the `dpcascade` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod seed;

pub use dpcascade_core as core;
pub use error::{Result, SimError};
