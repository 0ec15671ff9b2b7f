//! Exchange process R = max(R - T, W): series verdict and a sample path.

use ar_recurrence::classify::{exchange_verdict, kesten_kellerer_verdict, SeriesOptions};
use ar_recurrence::dist::{FiniteLaw, InnovationLaw};
use ar_recurrence::processes::exchange::simulate_exchange;
use ar_recurrence::rng;

fn main() -> ar_recurrence::error::Result<()> {
    let opts = SeriesOptions::default();
    let light = InnovationLaw::geometric(0.5);
    println!("geometric W: {:?}", kesten_kellerer_verdict(&light, opts)?.outcome);

    let heavy = InnovationLaw::pareto_tail(4.0).floored();
    let t = FiniteLaw::new(vec![0.5, 1.5], vec![0.5, 0.5])?;
    println!("floor(4/U) W, T in {{0.5, 1.5}}: {:?}", exchange_verdict(&t, &heavy, 4.0, opts)?.outcome);

    let path = simulate_exchange(&t, &light, 0.0, 20, &mut rng::stream(3));
    println!("{:?}", path.column("r").unwrap());
    Ok(())
}
