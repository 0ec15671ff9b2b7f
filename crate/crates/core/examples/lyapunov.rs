//! Contraction rate of a random 2×2 product, exact and estimated.

use ar_recurrence::linalg::Matrix;
use ar_recurrence::matrix_env::{estimate_lyapunov, exact_lambda, variation_stats, Atom, LyapunovOptions, MatrixEnsemble};

fn main() -> ar_recurrence::error::Result<()> {
    let a = Matrix::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]])?;
    let b = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.2, 0.1]])?;
    let ens = MatrixEnsemble::finite(vec![Atom::new(a.clone(), 0.5), Atom::new(b, 0.5)])?;

    let est = estimate_lyapunov(&ens, LyapunovOptions::new(20_000, 32, 1))?;
    println!("lambda ~ {:.4} +/- {:.4}", est.lambda_hat, est.half_width);

    let constant = MatrixEnsemble::constant(a.clone())?;
    println!("constant matrix: lambda = {:.6}", exact_lambda(&constant).unwrap());
    println!("{:?}", variation_stats(&a)?);
    Ok(())
}
