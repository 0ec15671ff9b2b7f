//! The coupled autoregressive, max-autoregressive and "N" processes driven by
//! one environment and innovation stream.

use rand::Rng;

use super::trajectory::TrajectoryRecord;
use crate::dist::InnovationLaw;
use crate::error::{Error, Result};
use crate::linalg::{vec_le, vec_norm, Matrix};
use crate::matrix_env::{sample_matrix, MatrixEnsemble};

/// `X_n = A_n X_{n−1} + Y_n`, `M_n = max(A_n M_{n−1}, Y_n)` and
/// `N_n = max_{m ≤ n} A_n⋯A_{m+1} Y_m`, all started from `Y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArState {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub nvec: Vec<f64>,
    pub step: u64,
    /// Componentwise-maximal members of `{A_n⋯A_{m+1} Y_m : m ≤ n}`. Nonnegative
    /// matrices preserve the componentwise order, so a dominated vector can
    /// never again contribute to the maximum and is dropped.
    frontier: Vec<Vec<f64>>,
    use_frontier: bool,
}

fn check_innovation(y: &[f64]) -> Result<()> {
    if y.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidLaw(format!("innovation {y:?} is not nonnegative")));
    }
    Ok(())
}

fn push_maximal(frontier: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    if frontier.iter().any(|u| vec_le(&v, u)) {
        return;
    }
    frontier.retain(|u| !vec_le(u, &v));
    frontier.push(v);
}

impl ArState {
    /// Scalar chains use the one-step recursion for `N`, which coincides
    /// with `M` when `d = 1`.
    pub fn new(y0: Vec<f64>) -> Result<Self> {
        let exact = y0.len() > 1;
        Self::build(y0, exact)
    }

    /// Always maintains `N` from the stored products, also for `d = 1`.
    pub fn with_frontier(y0: Vec<f64>) -> Result<Self> {
        Self::build(y0, true)
    }

    fn build(y0: Vec<f64>, use_frontier: bool) -> Result<Self> {
        if y0.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        check_innovation(&y0)?;
        let frontier = if use_frontier { vec![y0.clone()] } else { Vec::new() };
        Ok(ArState {
            x: y0.clone(),
            m: y0.clone(),
            nvec: y0,
            step: 0,
            frontier,
            use_frontier,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    /// `N ≤ M ≤ X` componentwise.
    pub fn coupling_holds(&self) -> bool {
        vec_le(&self.nvec, &self.m) && vec_le(&self.m, &self.x)
    }

    pub fn advance(&mut self, a: &Matrix, y: &[f64]) -> Result<()> {
        let d = self.dim();
        if a.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
        }
        if y.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: y.len() });
        }
        check_innovation(y)?;
        self.x = a.mul_vec(&self.x).iter().zip(y).map(|(u, v)| u + v).collect();
        self.m = a.mul_vec(&self.m).iter().zip(y).map(|(u, v)| u.max(*v)).collect();
        if self.use_frontier {
            let moved: Vec<Vec<f64>> = self.frontier.iter().map(|v| a.mul_vec(v)).collect();
            let mut next = Vec::with_capacity(moved.len() + 1);
            for v in moved.into_iter().chain(std::iter::once(y.to_vec())) {
                push_maximal(&mut next, v);
            }
            self.nvec = (0..d)
                .map(|i| next.iter().map(|v| v[i]).fold(0.0, f64::max))
                .collect();
            self.frontier = next;
        } else {
            self.nvec = a.mul_vec(&self.nvec).iter().zip(y).map(|(u, v)| u.max(*v)).collect();
        }
        self.step += 1;
        Ok(())
    }
}

/// One step of the coupled chains.
pub fn ar_step(state: &ArState, a: &Matrix, y: &[f64]) -> Result<ArState> {
    let mut next = state.clone();
    next.advance(a, y)?;
    Ok(next)
}

/// A realized environment `A_1, …, A_n` with innovations `Y_0, …, Y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub matrices: Vec<Matrix>,
    pub innovations: Vec<Vec<f64>>,
}

impl Environment {
    /// Draws `Y_0`, then `(A_k, Y_k)` for `k = 1..=n`.
    pub fn draw<R: Rng + ?Sized>(
        ensemble: &MatrixEnsemble,
        law: &InnovationLaw,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if law.dim() != ensemble.dim() {
            return Err(Error::DimensionMismatch {
                expected: ensemble.dim(),
                got: law.dim(),
            });
        }
        let mut matrices = Vec::with_capacity(n);
        let mut innovations = Vec::with_capacity(n + 1);
        innovations.push(law.sample_vector(rng));
        for _ in 0..n {
            matrices.push(sample_matrix(ensemble, rng).clone());
            innovations.push(law.sample_vector(rng));
        }
        Ok(Environment { matrices, innovations })
    }

    pub fn horizon(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.innovations[0].len()
    }

    /// `‖A_n⋯A_1‖` for `n = 0..=horizon`.
    pub fn product_norms(&self) -> Vec<f64> {
        let mut p = Matrix::identity(self.dim());
        let mut out = vec![p.norm_inf()];
        for a in &self.matrices {
            p = a.mul(&p);
            out.push(p.norm_inf());
        }
        out
    }
}

fn ar_columns(d: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(3 * d);
    for prefix in ["x", "m", "nvec"] {
        for i in 1..=d {
            cols.push(format!("{prefix}{i}"));
        }
    }
    cols
}

fn ar_row(s: &ArState) -> Vec<f64> {
    s.x.iter().chain(&s.m).chain(&s.nvec).copied().collect()
}

/// Runs the coupled chains through a realized environment. Panics if the
/// coupling `N ≤ M ≤ X` ever fails.
pub fn run_ar(env: &Environment) -> Result<TrajectoryRecord> {
    let mut state = ArState::new(env.innovations[0].clone())?;
    let mut rec = TrajectoryRecord::new(ar_columns(state.dim()));
    rec.push(0, ar_row(&state), vec_norm(&state.x));
    for (a, y) in env.matrices.iter().zip(&env.innovations[1..]) {
        state.advance(a, y)?;
        assert!(
            state.coupling_holds(),
            "coupling N <= M <= X violated at step {}",
            state.step
        );
        rec.push(state.step, ar_row(&state), vec_norm(&state.x));
    }
    Ok(rec)
}

/// Draws an environment and runs the coupled chains for `n` steps.
pub fn simulate_ar<R: Rng + ?Sized>(
    ensemble: &MatrixEnsemble,
    law: &InnovationLaw,
    n: usize,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    let env = Environment::draw(ensemble, law, n, rng)?;
    run_ar(&env)
}
