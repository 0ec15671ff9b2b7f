//! Multitype branching with immigration floor(Y) in a random environment.

use ar_recurrence::dist::InnovationLaw;
use ar_recurrence::linalg::Matrix;
use ar_recurrence::matrix_env::MatrixEnsemble;
use ar_recurrence::processes::ar::Environment;
use ar_recurrence::processes::branching::{run_branching, OffspringFamily};
use ar_recurrence::rng;

fn main() -> ar_recurrence::error::Result<()> {
    let ens = MatrixEnsemble::constant(Matrix::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]])?)?;
    let law = InnovationLaw::scaled_vector(InnovationLaw::geometric(0.2), 2);
    let mut rng = rng::stream(9);
    let env = Environment::draw(&ens, &law, 30, &mut rng)?;
    for (n, z) in run_branching(&env, OffspringFamily::Poisson, &mut rng)?.iter().enumerate() {
        println!("{n:3} {z:?}");
    }
    Ok(())
}
