//! Scenario files, the Monte Carlo probe and run orchestration.

pub mod agreement;
pub mod config;
pub mod probe;
pub mod run;
pub mod selftest;

pub use agreement::{agreement, Agreement, AgreementStatus, ClassifierOutcome};
pub use config::{ProcessSpec, ScenarioConfig};
pub use probe::{probe, ProbeReport, ProbeSpec, VerdictHint};
pub use run::{evaluate, run_scenario, simulate, ClassifierReport, Sample, ScenarioReport};
pub use selftest::{selftest, SelftestReport};
