//! Scalar AR(1) with log-Pareto innovations in its three regimes.

use ar_recurrence::classify::{series_verdict, SeriesSpec};
use ar_recurrence::dist::InnovationLaw;

fn main() -> ar_recurrence::error::Result<()> {
    let cases = [
        ("a = 1/2, p = 2", 0.5f64, 2.0),
        ("a = e^-2, p = 1", (-2f64).exp(), 1.0),
        ("a = 1/2, p = 1/2", 0.5, 0.5),
    ];
    for (name, a, p) in cases {
        let spec = SeriesSpec::log(InnovationLaw::log_pareto(1.0, p), 1.0, -a.ln());
        let v = series_verdict(&spec)?;
        println!("{name:18} {:?}  raabe limit {:?}", v.outcome, v.raabe_limit);
    }
    Ok(())
}
