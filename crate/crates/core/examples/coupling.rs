//! AR, max-AR and Pareto-frontier chains driven by one environment.

use ar_recurrence::dist::InnovationLaw;
use ar_recurrence::linalg::Matrix;
use ar_recurrence::matrix_env::{Atom, MatrixEnsemble};
use ar_recurrence::processes::ar::simulate_ar;
use ar_recurrence::rng;

fn main() -> ar_recurrence::error::Result<()> {
    let ens = MatrixEnsemble::finite(vec![
        Atom::new(Matrix::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]])?, 0.5),
        Atom::new(Matrix::from_rows(&[vec![0.5, 0.1], vec![0.2, 0.1]])?, 0.5),
    ])?;
    let law = InnovationLaw::scaled_vector(InnovationLaw::log_pareto(1.0, 2.0), 2);
    let rec = simulate_ar(&ens, &law, 10, &mut rng::stream(5))?;
    print!("{}", rec.to_csv());
    Ok(())
}
