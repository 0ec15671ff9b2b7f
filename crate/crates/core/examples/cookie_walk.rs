//! Cookie walk in a left-drifting environment, light and heavy cookies.

use ar_recurrence::classify::{cookie_verdict, SeriesOptions};
use ar_recurrence::dist::{FiniteLaw, InnovationLaw};
use ar_recurrence::processes::cookie::{simulate_cookie_walk, CookieWalkConfig};
use ar_recurrence::rng;

fn main() -> ar_recurrence::error::Result<()> {
    let omega = FiniteLaw::constant(0.4);
    for cookies in [InnovationLaw::geometric(0.5), InnovationLaw::log_pareto(0.5, 1.0).floored()] {
        let v = cookie_verdict(&omega, &cookies, 1.0, SeriesOptions::default())?;
        let cfg = CookieWalkConfig { omega: omega.clone(), cookies, steps: 100_000 };
        let out = simulate_cookie_walk(&cfg, &mut rng::stream(4))?;
        println!("{:?}: final position {}", v.outcome, out.final_position);
    }
    Ok(())
}
