//! Problem builders, brute-force oracles, experiment configs and persistence.
//!
//! The oracles here are the independent reference channel for the
//! iteration: they never call into [`crate::gdsa`], and they are limited to
//! dimension three.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod persist;
pub mod problem;

pub use config::{ConfigSource, ExperimentConfig};
pub use experiment::{Experiment, RunOutcome, VerifyReport};
pub use oracle::{fixed_point_oracle, proximity_argmin_oracle, proximity_value, GridSpec};
pub use problem::{ProblemInstance, SetDescriptor};
