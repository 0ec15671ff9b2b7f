//! Mortal frogs on the integers with sleepers on `ℕ₀`.
//!
//! Each awake frog survives each step with probability `p` and then moves
//! right with probability `r`. Frogs are run one at a time; the set of frogs
//! eventually woken does not depend on the order. The visited region is
//! always an interval `[0, frontier]`, so sleepers are drawn when the
//! frontier advances. A frog stepping to `−1` can only matter again if it
//! returns to `0`, which it does alive with probability `ϱ(p, r)` and then
//! restarts with a fresh (memoryless) lifetime.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::InnovationLaw;
use crate::error::{Error, Result};

/// Probability that a frog started at `0` reaches `1` before dying, the
/// smaller root of `a = pr + p(1−r)a²`.
pub fn frog_rho(p: f64, r: f64) -> f64 {
    let disc = 1.0 - 4.0 * p * p * r * (1.0 - r);
    2.0 * p * r / (1.0 + disc.max(0.0).sqrt())
}

fn default_site_cap() -> u64 {
    1_000_000
}

fn default_wake_cap() -> u64 {
    1_000_000
}

/// Default cap on frog moves per run.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

fn default_step_cap() -> u64 {
    DEFAULT_STEP_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrogConfig {
    pub p: f64,
    pub r: f64,
    pub sleep_law: InnovationLaw,
    #[serde(default = "default_site_cap")]
    pub site_cap: u64,
    #[serde(default = "default_wake_cap")]
    pub wake_cap: u64,
    /// Total frog steps before the run is cut short.
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
}

impl FrogConfig {
    pub fn new(p: f64, r: f64, sleep_law: InnovationLaw) -> Self {
        FrogConfig {
            p,
            r,
            sleep_law,
            site_cap: default_site_cap(),
            wake_cap: default_wake_cap(),
            step_cap: default_step_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::config("p", format!("survival probability {} not in (0,1]", self.p)));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::config("r", format!("right-step probability {} not in (0,1)", self.r)));
        }
        self.sleep_law.validate()?;
        if self.sleep_law.dim() != 1 || !self.sleep_law.is_integer_valued() {
            return Err(Error::config("sleep_law", "sleeper counts must be a scalar law on the nonnegative integers"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrogOutcome {
    pub woken_count: u64,
    /// Distinct frogs that were ever at `0`.
    pub zero_visit_count: u64,
    pub truncated: bool,
    /// Which budget ended the run, if any.
    pub truncation: Option<String>,
    pub frontier: u64,
    pub steps: u64,
}

fn sleepers<R: Rng + ?Sized>(law: &InnovationLaw, rng: &mut R) -> u64 {
    // `as` saturates, so an infinite draw becomes u64::MAX.
    law.sample(rng) as u64
}

pub fn simulate_frog<R: Rng + ?Sized>(config: &FrogConfig, rng: &mut R) -> Result<FrogOutcome> {
    config.validate()?;
    let rho = frog_rho(config.p, config.r);
    let mut out = FrogOutcome {
        woken_count: 0,
        zero_visit_count: 0,
        truncated: false,
        truncation: None,
        frontier: 0,
        steps: 0,
    };
    let cut = |out: &mut FrogOutcome, why: &str| {
        out.truncated = true;
        out.truncation = Some(why.to_string());
    };

    let y0 = sleepers(&config.sleep_law, rng);
    out.woken_count = y0;
    out.zero_visit_count = y0;
    if y0 > config.wake_cap {
        cut(&mut out, "wake_cap");
        return Ok(out);
    }
    let mut pending: Vec<(i64, u64)> = Vec::new();
    if y0 > 0 {
        pending.push((0, y0));
    }
    while let Some((start, count)) = pending.pop() {
        for _ in 0..count {
            let mut pos = start;
            let mut seen_zero = start == 0;
            loop {
                if config.p < 1.0 && rng.random::<f64>() >= config.p {
                    break;
                }
                if out.steps >= config.step_cap {
                    cut(&mut out, "step_cap");
                    return Ok(out);
                }
                out.steps += 1;
                pos += if rng.random::<f64>() < config.r { 1 } else { -1 };
                if pos > out.frontier as i64 {
                    out.frontier = pos as u64;
                    if out.frontier > config.site_cap {
                        cut(&mut out, "site_cap");
                        return Ok(out);
                    }
                    let y = sleepers(&config.sleep_law, rng);
                    out.woken_count = out.woken_count.saturating_add(y);
                    if out.woken_count > config.wake_cap {
                        cut(&mut out, "wake_cap");
                        return Ok(out);
                    }
                    if y > 0 {
                        pending.push((pos, y));
                    }
                }
                if pos == 0 && !seen_zero {
                    seen_zero = true;
                    out.zero_visit_count += 1;
                }
                if pos == -1 {
                    if rng.random::<f64>() < rho {
                        pos = 0;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}
