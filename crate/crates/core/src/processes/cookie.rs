//! Random walk in an i.i.d. environment perturbed by cookies.
//!
//! On each of the first `Y_x` visits to `x` the walker eats a cookie and
//! steps to `x+1`; afterwards it steps right with probability `ω_x`. Both
//! `Y_x` and `ω_x` are drawn on the first visit to `x`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{FiniteLaw, InnovationLaw};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CookieWalkConfig {
    pub omega: FiniteLaw,
    pub cookies: InnovationLaw,
    pub steps: u64,
}

impl CookieWalkConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.omega.support_range();
        if !(lo > 0.0 && hi < 1.0) {
            return Err(Error::config("omega", "environment must lie in (0,1)"));
        }
        self.cookies.validate()?;
        if self.cookies.dim() != 1 || !self.cookies.is_integer_valued() {
            return Err(Error::config("cookies", "cookie counts must be a scalar law on the nonnegative integers"));
        }
        if !(self.cookies.cdf(0.0) > 0.0) {
            return Err(Error::config("cookies", "cookie law needs P[Y = 0] > 0"));
        }
        Ok(())
    }

    /// `E[ln ρ₀]` with `ρ₀ = (1−ω₀)/ω₀`.
    pub fn mean_log_rho(&self) -> f64 {
        self.omega.expect(|w| ((1.0 - w) / w).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CookieWalkOutcome {
    pub final_position: i64,
    pub min_position: i64,
    pub max_position: i64,
    pub cookies_consumed: u64,
    /// Visits to `0` after time `0`.
    pub returns_to_zero: u64,
    pub drift_sign: i8,
}

#[derive(Clone, Copy)]
struct Site {
    cookies: u64,
    omega: f64,
}

/// The visited region is an interval around 0, so sites live in two
/// vectors growing outward.
struct Sites {
    right: Vec<Site>,
    left: Vec<Site>,
}

impl Sites {
    fn get<R: Rng + ?Sized>(&mut self, x: i64, cfg: &CookieWalkConfig, rng: &mut R) -> &mut Site {
        let (side, k) = if x >= 0 {
            (&mut self.right, x as usize)
        } else {
            (&mut self.left, (-x - 1) as usize)
        };
        if k == side.len() {
            let cookies = cfg.cookies.sample(rng) as u64;
            let omega = cfg.omega.sample(rng);
            side.push(Site { cookies, omega });
        }
        &mut side[k]
    }
}

/// Runs the walk, calling `observe(n, ξ_n)` for `n = 0..=steps`.
pub fn simulate_cookie_walk_with<R, F>(cfg: &CookieWalkConfig, rng: &mut R, mut observe: F) -> Result<CookieWalkOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(u64, i64),
{
    cfg.validate()?;
    let mut sites = Sites {
        right: Vec::new(),
        left: Vec::new(),
    };
    let mut pos: i64 = 0;
    let mut out = CookieWalkOutcome {
        final_position: 0,
        min_position: 0,
        max_position: 0,
        cookies_consumed: 0,
        returns_to_zero: 0,
        drift_sign: 0,
    };
    observe(0, 0);
    for n in 1..=cfg.steps {
        let site = sites.get(pos, cfg, rng);
        if site.cookies > 0 {
            site.cookies -= 1;
            out.cookies_consumed += 1;
            pos += 1;
        } else {
            let omega = site.omega;
            pos += if rng.random::<f64>() < omega { 1 } else { -1 };
        }
        if pos == 0 {
            out.returns_to_zero += 1;
        }
        out.min_position = out.min_position.min(pos);
        out.max_position = out.max_position.max(pos);
        observe(n, pos);
    }
    out.final_position = pos;
    out.drift_sign = pos.signum() as i8;
    Ok(out)
}

pub fn simulate_cookie_walk<R: Rng + ?Sized>(cfg: &CookieWalkConfig, rng: &mut R) -> Result<CookieWalkOutcome> {
    simulate_cookie_walk_with(cfg, rng, |_, _| {})
}
