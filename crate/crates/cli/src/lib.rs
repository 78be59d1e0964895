//! Configuration-driven experiment runner: parses flat key=value
//! configs, dispatches to the numerical library, and emits CSV +
//! summary artifacts with a PASS/FAIL verdict.

pub mod config;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::{execute, run, RunArtifacts};
