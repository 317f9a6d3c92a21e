//! Experiment runner for randomly perturbed maps: configuration, scenario
//! runners, manifests and a quick harness self-test.

pub mod config;
pub mod runner;
pub mod scenario;
pub mod selftest;

pub use config::{ExperimentConfig, Scenario};
pub use runner::{run_to_dir, Manifest};
pub use scenario::{Criterion, RunError, ScenarioResult, Setup};
