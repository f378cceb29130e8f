//! Experiment orchestration: configuration, run records, statistics and the
//! amplification, containment, sandwich, counterexample and curve runs.

pub mod amplify;
pub mod cli;
pub mod config;
pub mod counterexample;
pub mod curve;
pub mod record;
pub mod sandwich;
pub mod stats;

pub use amplify::{amplification_bound, amplification_experiment, pathwise_experiment, pathwise_monotone_check, PathwiseReport};
pub use config::{ExperimentConfig, ExperimentKind, FamilyConfig, RadiusGrid};
pub use counterexample::{counterexample_experiment, default_alpha, default_counterexample_grid};
pub use curve::{threshold_curve, CurveOptions};
pub use record::{Check, RunRecord};
pub use sandwich::{sandwich_experiment, SandwichOptions};
pub use stats::{wilson_interval, Estimate};
