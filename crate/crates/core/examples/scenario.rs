//! Classifier and Monte Carlo probe on a bundled scenario file.
//!
//! `cargo run --release --example scenario -- scenarios/zg_null.json`

use std::path::PathBuf;

use ar_recurrence::harness::{evaluate, ScenarioConfig};

fn main() -> ar_recurrence::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/zg_positive.json"));
    let report = evaluate(&ScenarioConfig::load(&path)?)?;
    println!("classifier: {:?}", report.classifier.outcome);
    println!("probe: {:?} (divergence {:.3})", report.probe.verdict_hint, report.probe.divergence_fraction);
    println!("agreement: {:?} ({})", report.agreement.status, report.agreement.detail);
    Ok(())
}
