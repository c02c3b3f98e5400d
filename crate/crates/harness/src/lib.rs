//! Experiment harness for `vqss-core`: scenario files, a seeded Monte Carlo
//! runner, JSON-lines transcripts, JSON reports, closed-form detection rates
//! and the acceptance suite.

pub mod acceptance;
pub mod analytic;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod transcript;

pub use error::{HarnessError, Result};
pub use report::{Aggregates, Rate, RunReport, TrialRecord};
pub use runner::{run_scenario, run_scenario_serial, run_scenario_with, run_trial, trial_rng};
pub use scenario::{AttackConfig, Checks, Scenario, Secret};
