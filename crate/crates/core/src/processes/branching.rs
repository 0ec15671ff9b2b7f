//! Multitype branching with immigration in a random environment.
//!
//! Offspring of a type-`j` individual are independent across types with
//! `E[ξ^{i,j} | A] = A_{ij}`. Individuals of one cohort and type are
//! reproduced in aggregate: the sum of `c` i.i.d. offspring counts is drawn
//! directly from its exact law.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::ar::Environment;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::matrix_env::MatrixEnsemble;

pub const DEFAULT_POPULATION_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OffspringFamily {
    #[default]
    Poisson,
    /// Requires every mean entry to be at most 1.
    Bernoulli,
    /// `P[ξ = k] = q(1−q)^k` with `q = 1/(1+mean)`.
    Geometric,
}

impl OffspringFamily {
    pub fn validate(&self, ensemble: &MatrixEnsemble) -> Result<()> {
        if *self == OffspringFamily::Bernoulli
            && ensemble.support().any(|a| a.entries().iter().any(|&v| v > 1.0))
        {
            return Err(Error::InvalidEnsemble(
                "bernoulli offspring need mean entries <= 1".into(),
            ));
        }
        Ok(())
    }

    /// Variance of one offspring count with the given mean.
    pub fn variance(&self, mean: f64) -> f64 {
        match self {
            OffspringFamily::Poisson => mean,
            OffspringFamily::Bernoulli => mean * (1.0 - mean),
            OffspringFamily::Geometric => mean * (1.0 + mean),
        }
    }

    /// Bound on the norms of the conditional covariance matrices over the
    /// support. Components are independent, so each covariance matrix is
    /// diagonal.
    pub fn gamma2(&self, ensemble: &MatrixEnsemble) -> f64 {
        ensemble
            .support()
            .flat_map(|a| a.entries().iter().map(|&m| self.variance(m)).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    /// Total offspring of `count` individuals, each with the given mean.
    pub fn sample_total<R: Rng + ?Sized>(&self, count: u64, mean: f64, rng: &mut R) -> Result<u64> {
        if count == 0 || mean == 0.0 {
            return Ok(0);
        }
        let expected = count as f64 * mean;
        if expected > 1e15 {
            return Err(Error::PopulationOverflow(expected as u64));
        }
        let n = match self {
            OffspringFamily::Poisson => Poisson::new(expected).expect("positive mean").sample(rng),
            OffspringFamily::Bernoulli => {
                return Ok(Binomial::new(count, mean)
                    .map_err(|e| Error::InvalidEnsemble(e.to_string()))?
                    .sample(rng))
            }
            OffspringFamily::Geometric => {
                let lam = Gamma::new(count as f64, mean).expect("positive shape").sample(rng);
                if lam <= 0.0 {
                    0.0
                } else {
                    Poisson::new(lam).expect("positive mean").sample(rng)
                }
            }
        };
        Ok(n as u64)
    }
}

/// Descendants alive at the current step of the immigrants that arrived at
/// step `born`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cohort {
    pub born: u64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingState {
    /// Nonextinct cohorts; extinct ones are pruned.
    pub cohorts: Vec<Cohort>,
    pub z: Vec<u64>,
    pub step: u64,
    /// Mean matrix used for the latest step.
    pub env_draw: Option<Matrix>,
    #[serde(skip)]
    cap: u64,
}

/// `⌊y⌋` componentwise, refusing values above `cap`.
pub fn floor_counts(y: &[f64], cap: u64) -> Result<Vec<u64>> {
    y.iter()
        .map(|&v| {
            let f = v.floor();
            if f > cap as f64 {
                Err(Error::PopulationOverflow(if f.is_finite() { f as u64 } else { u64::MAX }))
            } else {
                Ok(f as u64)
            }
        })
        .collect()
}

impl BranchingState {
    pub fn new(initial: Vec<u64>) -> Self {
        Self::with_cap(initial, DEFAULT_POPULATION_CAP)
    }

    pub fn with_cap(initial: Vec<u64>, cap: u64) -> Self {
        let z = initial.clone();
        let cohorts = if initial.iter().any(|&c| c > 0) {
            vec![Cohort { born: 0, counts: initial }]
        } else {
            Vec::new()
        };
        BranchingState {
            cohorts,
            z,
            step: 0,
            env_draw: None,
            cap,
        }
    }

    pub fn population(&self) -> u64 {
        self.z.iter().fold(0u64, |a, &b| a.saturating_add(b))
    }

    pub fn is_empty(&self) -> bool {
        self.population() == 0
    }

    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        family: OffspringFamily,
        a: &Matrix,
        immigrants: &[u64],
        rng: &mut R,
    ) -> Result<()> {
        let d = self.z.len();
        if a.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
        }
        if immigrants.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: immigrants.len() });
        }
        for cohort in &mut self.cohorts {
            let mut next = vec![0u64; d];
            for (j, &c) in cohort.counts.iter().enumerate() {
                for (i, slot) in next.iter_mut().enumerate() {
                    *slot = slot.saturating_add(family.sample_total(c, a[(i, j)], rng)?);
                }
            }
            cohort.counts = next;
        }
        self.step += 1;
        self.cohorts.retain(|c| c.counts.iter().any(|&v| v > 0));
        if immigrants.iter().any(|&v| v > 0) {
            self.cohorts.push(Cohort {
                born: self.step,
                counts: immigrants.to_vec(),
            });
        }
        let mut z = vec![0u64; d];
        for cohort in &self.cohorts {
            for (zi, ci) in z.iter_mut().zip(&cohort.counts) {
                *zi = zi.saturating_add(*ci);
            }
        }
        self.z = z;
        self.env_draw = Some(a.clone());
        let total = self.population();
        if total > self.cap {
            return Err(Error::PopulationOverflow(total));
        }
        Ok(())
    }
}

/// One step: every individual reproduces under `a`, then the immigrant
/// cohort is appended.
pub fn branching_step<R: Rng + ?Sized>(
    state: &BranchingState,
    family: OffspringFamily,
    a: &Matrix,
    immigrants: &[u64],
    rng: &mut R,
) -> Result<BranchingState> {
    let mut next = state.clone();
    next.advance(family, a, immigrants, rng)?;
    Ok(next)
}

/// `Z_0, …, Z_n` through a realized environment with immigration `⌊Y_k⌋`.
pub fn run_branching<R: Rng + ?Sized>(
    env: &Environment,
    family: OffspringFamily,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    let mut state = BranchingState::new(floor_counts(&env.innovations[0], DEFAULT_POPULATION_CAP)?);
    let mut out = vec![state.z.clone()];
    for (a, y) in env.matrices.iter().zip(&env.innovations[1..]) {
        let imm = floor_counts(y, DEFAULT_POPULATION_CAP)?;
        state.advance(family, a, &imm, rng)?;
        out.push(state.z.clone());
    }
    Ok(out)
}

/// Survival indicators `B_n ≠ 0`, `n = 0..=len`, for the process without
/// immigration started from one individual of type `founder`.
pub fn founder_survival<R: Rng + ?Sized>(
    matrices: &[Matrix],
    family: OffspringFamily,
    founder: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let d = matrices.first().map_or(1, Matrix::dim);
    let mut initial = vec![0u64; d];
    initial[founder] = 1;
    let mut state = BranchingState::new(initial);
    let none = vec![0u64; d];
    let mut alive = vec![true];
    for a in matrices {
        if state.is_empty() {
            alive.push(false);
            continue;
        }
        state.advance(family, a, &none, rng)?;
        alive.push(!state.is_empty());
    }
    Ok(alive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::InnovationLaw;
    use crate::matrix_env::Atom;
    use crate::rng;

    #[test]
    fn empty_state_stays_empty() {
        let mut s = BranchingState::new(vec![0, 0]);
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mut r = rng::stream(1);
        for _ in 0..10 {
            s.advance(OffspringFamily::Poisson, &a, &[0, 0], &mut r).unwrap();
        }
        assert_eq!(s.z, vec![0, 0]);
        assert!(s.cohorts.is_empty());
    }

    #[test]
    fn z_is_cohort_sum() {
        let a = Matrix::from_rows(&[vec![0.5, 0.3], vec![0.2, 0.4]]).unwrap();
        let mut s = BranchingState::new(vec![3, 1]);
        let mut r = rng::stream(2);
        for k in 0..20 {
            s = branching_step(&s, OffspringFamily::Poisson, &a, &[k % 3, 1], &mut r).unwrap();
            let mut sum = vec![0u64; 2];
            for c in &s.cohorts {
                sum[0] += c.counts[0];
                sum[1] += c.counts[1];
            }
            assert_eq!(sum, s.z);
        }
    }

    #[test]
    fn single_line_bernoulli_survival() {
        let half = Matrix::scalar(0.5);
        let ms = vec![half; 5];
        let reps = 40_000;
        let mut r = rng::stream(7);
        let mut alive = 0;
        for _ in 0..reps {
            if founder_survival(&ms, OffspringFamily::Bernoulli, 0, &mut r).unwrap()[5] {
                alive += 1;
            }
        }
        let p = 0.5f64.powi(5);
        let est = alive as f64 / reps as f64;
        let sd = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((est - p).abs() < 3.0 * sd, "{est} vs {p}");
    }

    #[test]
    fn aggregated_sums_have_exact_means() {
        let mut r = rng::stream(3);
        for fam in [OffspringFamily::Poisson, OffspringFamily::Bernoulli, OffspringFamily::Geometric] {
            let reps = 20_000;
            let total: u64 = (0..reps).map(|_| fam.sample_total(10, 0.3, &mut r).unwrap()).sum();
            let mean = total as f64 / reps as f64;
            let sd = (10.0 * fam.variance(0.3) / reps as f64).sqrt();
            assert!((mean - 3.0).abs() < 5.0 * sd, "{fam:?}: {mean}");
        }
    }

    #[test]
    fn overflow_reported() {
        let a = Matrix::scalar(50.0);
        let mut s = BranchingState::with_cap(vec![10], 1_000_000);
        let mut r = rng::stream(0);
        let res = (0..10).try_for_each(|_| s.advance(OffspringFamily::Poisson, &a, &[0], &mut r));
        assert!(matches!(res, Err(Error::PopulationOverflow(_))));
    }

    #[test]
    fn bernoulli_rejects_large_means() {
        let ens = MatrixEnsemble::constant(Matrix::scalar(1.5)).unwrap();
        assert!(OffspringFamily::Bernoulli.validate(&ens).is_err());
        assert!(OffspringFamily::Poisson.validate(&ens).is_ok());
        assert_eq!(OffspringFamily::Geometric.gamma2(&ens), 1.5 * 2.5);
    }

    #[test]
    fn mean_identity_on_one_environment() {
        let ens = MatrixEnsemble::finite(vec![
            Atom::new(Matrix::from_rows(&[vec![0.5, 0.3], vec![0.2, 0.4]]).unwrap(), 0.5),
            Atom::new(Matrix::from_rows(&[vec![0.6, 0.2], vec![0.3, 0.5]]).unwrap(), 0.5),
        ])
        .unwrap();
        let law = InnovationLaw::scaled_vector(InnovationLaw::poisson(2.0), 2);
        let env = Environment::draw(&ens, &law, 10, &mut rng::stream(11)).unwrap();
        let x = super::super::ar::run_ar(&env).unwrap();
        let reps = 4000;
        let runs: Vec<Vec<Vec<u64>>> = rng::replicate(12, reps, |_, r| {
            run_branching(&env, OffspringFamily::Poisson, r).unwrap()
        });
        for n in [1, 5, 10] {
            for i in 0..2 {
                let vals: Vec<f64> = runs.iter().map(|z| z[n][i] as f64).collect();
                let mean = vals.iter().sum::<f64>() / reps as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                let se = (var / reps as f64).sqrt().max(1e-12);
                let target = x.values[n][i];
                assert!((mean - target).abs() < 5.0 * se, "n={n} i={i}: {mean} vs {target}");
            }
        }
    }
}
