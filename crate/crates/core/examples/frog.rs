//! Mortal frogs: the return probability and a few simulated runs.

use ar_recurrence::classify::{frog_verdict, SeriesOptions};
use ar_recurrence::dist::InnovationLaw;
use ar_recurrence::processes::frog::{frog_rho, simulate_frog, FrogConfig};
use ar_recurrence::rng;

fn main() -> ar_recurrence::error::Result<()> {
    for (p, r) in [(1.0, 0.25), (0.9, 0.5), (1.0, 0.5)] {
        println!("rho({p}, {r}) = {:.10}", frog_rho(p, r));
    }

    let heavy = InnovationLaw::log_pareto(0.005, 1.0).floored();
    let v = frog_verdict(1.0, 0.25, &heavy, 1.0, SeriesOptions::default())?;
    println!("heavy sleepers: {:?}", v.outcome);

    let cfg = FrogConfig::new(1.0, 0.25, InnovationLaw::deterministic(1.0));
    let mut rng = rng::stream(2);
    for _ in 0..5 {
        let out = simulate_frog(&cfg, &mut rng)?;
        println!("woken {} frontier {} truncated {}", out.woken_count, out.frontier, out.truncated);
    }
    Ok(())
}
