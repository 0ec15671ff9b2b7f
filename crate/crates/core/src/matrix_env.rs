//! The i.i.d. coefficient-matrix environment.
//!
//! A [`MatrixEnsemble`] is a finitely supported law on nonnegative `d×d`
//! matrices. On top of it this module provides renormalized products
//! ([`LogProductState`]), Monte Carlo estimation of the (negated) top Lyapunov
//! exponent λ, the Perron root of a primitive matrix, the primitivity and
//! joint-positivity checks, and the entry-variation statistics `δ`, `Δ`, `μ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

/// Normal quantile used for the 99% confidence half-width.
pub const CI_Z99: f64 = 2.576;

/// Default cap on `|support|^K` products enumerated by [`check_pr`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub matrix: Matrix,
    pub p: f64,
}

impl Atom {
    pub fn new(matrix: Matrix, p: f64) -> Self {
        Atom { matrix, p }
    }
}

/// Finitely supported law of the coefficient matrix `A_1`.
///
/// A constant environment is a one-atom ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleLiteral", into = "EnsembleLiteral")]
pub struct MatrixEnsemble {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnsembleLiteral {
    dim: usize,
    atoms: Vec<Atom>,
}

impl TryFrom<EnsembleLiteral> for MatrixEnsemble {
    type Error = Error;
    fn try_from(lit: EnsembleLiteral) -> Result<Self> {
        let ens = MatrixEnsemble::finite(lit.atoms)?;
        if ens.dim != lit.dim {
            return Err(Error::DimensionMismatch {
                expected: lit.dim,
                got: ens.dim,
            });
        }
        Ok(ens)
    }
}

impl From<MatrixEnsemble> for EnsembleLiteral {
    fn from(e: MatrixEnsemble) -> Self {
        EnsembleLiteral {
            dim: e.dim,
            atoms: e.atoms,
        }
    }
}

impl MatrixEnsemble {
    pub fn constant(matrix: Matrix) -> Result<Self> {
        Self::finite(vec![Atom { matrix, p: 1.0 }])
    }

    pub fn finite(atoms: Vec<Atom>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("no atoms".into()))?;
        let dim = first.matrix.dim();
        let mut total = 0.0;
        for (k, atom) in atoms.iter().enumerate() {
            if atom.matrix.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: atom.matrix.dim(),
                });
            }
            if !atom.matrix.is_nonnegative() {
                return Err(Error::InvalidEnsemble(format!(
                    "atom {k} has a negative or non-finite entry"
                )));
            }
            if !(atom.p >= 0.0 && atom.p <= 1.0) {
                return Err(Error::InvalidEnsemble(format!(
                    "atom {k} has probability {}",
                    atom.p
                )));
            }
            total += atom.p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(MatrixEnsemble { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Atoms carrying positive probability.
    pub fn support(&self) -> impl Iterator<Item = &Matrix> {
        self.atoms.iter().filter(|a| a.p > 0.0).map(|a| &a.matrix)
    }

    /// The matrix if the ensemble is a point mass.
    pub fn as_constant(&self) -> Option<&Matrix> {
        let mut it = self.support();
        let first = it.next()?;
        if it.all(|m| m == first) {
            Some(first)
        } else {
            None
        }
    }

    /// `γ₁`-style bound: the largest `‖A‖` over the support.
    pub fn norm_bound(&self) -> f64 {
        self.support().map(Matrix::norm_inf).fold(0.0, f64::max)
    }

    /// Draws an atom index; zero-mass atoms are never returned.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.atoms.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (k, atom) in self.atoms.iter().enumerate() {
            if atom.p <= 0.0 {
                continue;
            }
            acc += atom.p;
            last = k;
            if u < acc {
                return k;
            }
        }
        last
    }
}

/// Draws `A` from the ensemble.
pub fn sample_matrix<'a, R: Rng + ?Sized>(ensemble: &'a MatrixEnsemble, rng: &mut R) -> &'a Matrix {
    &ensemble.atoms[ensemble.sample_index(rng)].matrix
}

/// A matrix product kept as `ln‖Π‖` plus the product scaled to unit norm.
///
/// Absorbing multiplies on the left, so after absorbing `A_1, …, A_n` the
/// state represents `A_n ⋯ A_1` and `log_norm = −S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProductState {
    normalized: Matrix,
    log_norm: f64,
    length: usize,
}

impl LogProductState {
    pub fn new(dim: usize) -> Self {
        LogProductState {
            normalized: Matrix::identity(dim),
            log_norm: 0.0,
            length: 0,
        }
    }

    pub fn normalized_product(&self) -> &Matrix {
        &self.normalized
    }

    /// `ln‖A_n ⋯ A_1‖`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// `S_n = −ln‖A_n ⋯ A_1‖`.
    pub fn s(&self) -> f64 {
        -self.log_norm
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// The represented product itself (may under/overflow for long products).
    pub fn product(&self) -> Matrix {
        self.normalized.scale(self.log_norm.exp())
    }

    pub fn absorb(&self, a: &Matrix) -> Result<Self> {
        let mut next = self.clone();
        next.absorb_in_place(a)?;
        Ok(next)
    }

    pub fn absorb_in_place(&mut self, a: &Matrix) -> Result<()> {
        if a.dim() != self.normalized.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.normalized.dim(),
                got: a.dim(),
            });
        }
        let prod = a.mul(&self.normalized);
        let norm = prod.norm_inf();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroProduct);
        }
        self.normalized = prod.scale(1.0 / norm);
        self.log_norm += norm.ln();
        self.length += 1;
        Ok(())
    }
}

/// Monte Carlo estimate of λ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda_hat: f64,
    /// Half-width of the 99% normal-approximation interval across replicas.
    pub half_width: f64,
    pub trajectory_length: usize,
    pub burn_in: usize,
    pub replicas: usize,
    /// Mean over replicas of `Σ_{k≤n} ‖A_k ⋯ A_1‖` (diagnostic only).
    pub sigma_hat: f64,
    /// Per-replica values of `S_n` (used by concentration diagnostics).
    #[serde(skip)]
    pub s_values: Vec<f64>,
}

impl LyapunovEstimate {
    pub fn contains(&self, lambda: f64) -> bool {
        (self.lambda_hat - lambda).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    pub steps: usize,
    pub replicas: usize,
    /// Steps discarded before the per-step average; defaults to `steps / 4`.
    pub burn_in: Option<usize>,
    pub seed: u64,
}

impl LyapunovOptions {
    pub fn new(steps: usize, replicas: usize, seed: u64) -> Self {
        LyapunovOptions {
            steps,
            replicas,
            burn_in: None,
            seed,
        }
    }
}

/// Rejects ensembles with an atom whose column is entirely zero: such an atom
/// makes every long product have a zero column, so joint positivity fails.
pub fn check_nondegenerate(ensemble: &MatrixEnsemble) -> Result<()> {
    let d = ensemble.dim();
    for (k, atom) in ensemble.atoms().iter().enumerate() {
        if atom.p <= 0.0 {
            continue;
        }
        for j in 0..d {
            if (0..d).all(|i| atom.matrix[(i, j)] == 0.0) {
                return Err(Error::DegenerateEnsemble(format!(
                    "atom {k} has an all-zero column {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Estimates λ as the replica mean of `(S_n − S_b)/(n − b)` with burn-in `b`.
///
/// Discarding the burn-in removes the `O(1/n)` bias from the transient of the
/// normalized product; for constant environments the estimate then equals
/// `−ln ϱ` to machine precision.
pub fn estimate_lyapunov(ensemble: &MatrixEnsemble, opts: LyapunovOptions) -> Result<LyapunovEstimate> {
    check_nondegenerate(ensemble)?;
    if opts.steps == 0 || opts.replicas == 0 {
        return Err(Error::InvalidEnsemble("steps and replicas must be positive".into()));
    }
    let burn_in = opts.burn_in.unwrap_or(opts.steps / 4).min(opts.steps - 1);
    let runs = rng::replicate(opts.seed, opts.replicas, |_, stream| -> Result<(f64, f64, f64)> {
        let mut state = LogProductState::new(ensemble.dim());
        let mut s_burn = 0.0;
        let mut sigma = 0.0;
        for step in 1..=opts.steps {
            state.absorb_in_place(sample_matrix(ensemble, stream))?;
            sigma += state.log_norm().exp();
            if step == burn_in {
                s_burn = state.s();
            }
        }
        let rate = (state.s() - s_burn) / (opts.steps - burn_in) as f64;
        Ok((rate, state.s(), sigma))
    });
    let runs: Vec<(f64, f64, f64)> = runs.into_iter().collect::<Result<_>>()?;
    let r = runs.len() as f64;
    let mean = runs.iter().map(|x| x.0).sum::<f64>() / r;
    let half_width = if runs.len() > 1 {
        let var = runs.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (r - 1.0);
        CI_Z99 * var.sqrt() / r.sqrt()
    } else {
        f64::INFINITY
    };
    Ok(LyapunovEstimate {
        lambda_hat: mean,
        half_width,
        trajectory_length: opts.steps,
        burn_in,
        replicas: opts.replicas,
        sigma_hat: runs.iter().map(|x| x.2).sum::<f64>() / r,
        s_values: runs.iter().map(|x| x.1).collect(),
    })
}

/// Exact λ where it is available in closed form: `−ln ϱ(A)` for a primitive
/// constant environment and `−E[ln A_1]` in dimension one.
pub fn exact_lambda(ensemble: &MatrixEnsemble) -> Option<f64> {
    if let Some(a) = ensemble.as_constant() {
        return spectral_radius(a).ok().map(|p| -p.rho.ln());
    }
    if ensemble.dim() == 1 {
        let mut acc = 0.0;
        for atom in ensemble.atoms().iter().filter(|a| a.p > 0.0) {
            let v = atom.matrix[(0, 0)];
            if v <= 0.0 {
                return None;
            }
            acc -= atom.p * v.ln();
        }
        return Some(acc);
    }
    None
}

/// Perron root of a primitive matrix together with the limit `H = lim ϱ⁻ⁿAⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronRoot {
    pub rho: f64,
    /// Right Perron vector, `‖·‖∞ = 1`.
    pub right: Vec<f64>,
    /// Left Perron vector, `‖·‖∞ = 1`.
    pub left: Vec<f64>,
    /// `H = r·lᵀ / (l·r)`.
    pub limit: Matrix,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000_000;

fn power_iterate(a: &Matrix) -> (f64, Vec<f64>, usize) {
    let d = a.dim();
    let mut v = vec![1.0; d];
    let mut prev = f64::NAN;
    for it in 1..=POWER_MAX_ITER {
        let w = a.mul_vec(&v);
        let q = crate::linalg::vec_norm(&w);
        if q == 0.0 {
            return (0.0, v, it);
        }
        v = w.into_iter().map(|x| x / q).collect();
        if (q - prev).abs() < POWER_TOL {
            return (q, v, it);
        }
        prev = q;
    }
    (prev, v, POWER_MAX_ITER)
}

/// Perron root by power iteration; stops once successive norm quotients
/// differ by less than `1e-12`.
pub fn spectral_radius(a: &Matrix) -> Result<PerronRoot> {
    if !a.is_nonnegative() {
        return Err(Error::InvalidEnsemble("matrix has negative entries".into()));
    }
    if !is_primitive(a) {
        return Err(Error::NotPrimitive);
    }
    let (rho, right, it_r) = power_iterate(a);
    let (_, left, it_l) = power_iterate(&a.transpose());
    let d = a.dim();
    let lr: f64 = left.iter().zip(&right).map(|(l, r)| l * r).sum();
    let mut limit = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            limit[(i, j)] = right[i] * left[j] / lr;
        }
    }
    Ok(PerronRoot {
        rho,
        right,
        left,
        limit,
        iterations: it_r.max(it_l),
    })
}

fn bool_mul(a: &[bool], b: &[bool], d: usize) -> Vec<bool> {
    let mut out = vec![false; d * d];
    for i in 0..d {
        for k in 0..d {
            if !a[i * d + k] {
                continue;
            }
            for j in 0..d {
                out[i * d + j] |= b[k * d + j];
            }
        }
    }
    out
}

/// `true` iff some power `A^k`, `k ≤ (d−1)²+1`, is entrywise positive.
pub fn is_primitive(a: &Matrix) -> bool {
    let d = a.dim();
    let pattern: Vec<bool> = a.entries().iter().map(|&v| v > 0.0).collect();
    let cap = (d - 1) * (d - 1) + 1;
    let mut power = pattern.clone();
    for k in 1..=cap {
        if power.iter().all(|&b| b) {
            return true;
        }
        if k < cap {
            power = bool_mul(&power, &pattern, d);
        }
    }
    false
}

/// Enumerates every ordered product of `k` support atoms and returns the
/// smallest entry over all of them when each product is entrywise positive.
pub fn check_pr(ensemble: &MatrixEnsemble, k: usize) -> Result<Option<f64>> {
    check_pr_with_budget(ensemble, k, DEFAULT_ENUMERATION_BUDGET)
}

pub fn check_pr_with_budget(ensemble: &MatrixEnsemble, k: usize, budget: u64) -> Result<Option<f64>> {
    let support: Vec<&Matrix> = ensemble.support().collect();
    let requested = (support.len() as f64).powi(k as i32);
    if requested > budget as f64 {
        return Err(Error::SupportTooLarge { requested, budget });
    }
    if k == 0 {
        let id = Matrix::identity(ensemble.dim());
        return Ok(id.is_positive().then(|| id.min_entry()));
    }
    fn walk(support: &[&Matrix], prefix: &Matrix, depth: usize, k: usize, kappa: &mut f64) -> bool {
        for a in support {
            let prod = prefix.mul(a);
            if depth + 1 == k {
                if !prod.is_positive() {
                    return false;
                }
                *kappa = kappa.min(prod.min_entry());
            } else if !walk(support, &prod, depth + 1, k, kappa) {
                return false;
            }
        }
        true
    }
    let mut kappa = f64::INFINITY;
    let id = Matrix::identity(ensemble.dim());
    Ok(walk(&support, &id, 0, k, &mut kappa).then_some(kappa))
}

/// Entry-variation statistics of a nonnegative matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationStats {
    /// `δ_A = ‖A‖₁ / μ(A)`, infinite when some column is zero.
    pub delta: f64,
    /// `Δ_A`: largest ratio between two entries sharing a row or a column.
    /// `None` unless `A` is entrywise positive.
    pub big_delta: Option<f64>,
    /// `μ(A) = min_j max_i A_{ij}`.
    pub mu: f64,
}

pub fn mu(a: &Matrix) -> f64 {
    let d = a.dim();
    (0..d)
        .map(|j| (0..d).map(|i| a[(i, j)]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

pub fn delta(a: &Matrix) -> Result<f64> {
    if a.entries().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let m = mu(a);
    Ok(if m == 0.0 { f64::INFINITY } else { a.norm_l1() / m })
}

pub fn big_delta(a: &Matrix) -> Result<f64> {
    if !a.is_positive() {
        return Err(Error::NonPositive);
    }
    let d = a.dim();
    let mut best: f64 = 1.0;
    for i in 0..d {
        let row = (0..d).map(|j| a[(i, j)]);
        let (lo, hi) = row.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        best = best.max(hi / lo);
        let col = (0..d).map(|j| a[(j, i)]);
        let (lo, hi) = col.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        best = best.max(hi / lo);
    }
    Ok(best)
}

/// `δ`, `Δ` and `μ` of `A`. Fails with `ZeroMatrix` for `A = 0`; `Δ` is
/// reported as `None` for matrices with a zero entry (see [`big_delta`]).
pub fn variation_stats(a: &Matrix) -> Result<VariationStats> {
    Ok(VariationStats {
        delta: delta(a)?,
        big_delta: big_delta(a).ok(),
        mu: mu(a),
    })
}

/// Relative slack granted to the variation inequalities for rounding.
const VARIATION_SLACK: f64 = 1e-9;

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs * (1.0 + VARIATION_SLACK)
}

/// Names of the variation inequalities that fail for `(A, B, x)`:
/// `Δ_AB ≤ max(Δ_A, Δ_B)`, `Δ_AB ≤ Δ_A·δ_B`, `δ_AB ≤ δ_A·δ_B`,
/// `δ_A ≤ d·Δ_A` and `‖A‖·‖x‖ ≤ d·δ_A·‖Ax‖`. Each is checked only where
/// its quantities are defined.
pub fn variation_violations(a: &Matrix, b: &Matrix, x: &[f64]) -> Vec<&'static str> {
    let d = a.dim() as f64;
    let ab = a.mul(b);
    let mut out = Vec::new();
    let (da, db, dab) = (delta(a).ok(), delta(b).ok(), delta(&ab).ok());
    let (ba, bb, bab) = (big_delta(a).ok(), big_delta(b).ok(), big_delta(&ab).ok());
    if let (Some(ba), Some(bb), Some(bab)) = (ba, bb, bab) {
        if exceeds(bab, ba.max(bb)) {
            out.push("big_delta_of_product_vs_max");
        }
    }
    if let (Some(ba), Some(db), Some(bab)) = (ba, db, bab) {
        if exceeds(bab, ba * db) {
            out.push("big_delta_of_product_vs_mixed");
        }
    }
    if let (Some(da), Some(db), Some(dab)) = (da, db, dab) {
        if exceeds(dab, da * db) {
            out.push("delta_submultiplicative");
        }
    }
    if let (Some(da), Some(ba)) = (da, ba) {
        if exceeds(da, d * ba) {
            out.push("delta_vs_big_delta");
        }
    }
    if let Some(da) = da {
        let ax = crate::linalg::vec_norm(&a.mul_vec(x));
        if da.is_finite() && exceeds(a.norm_inf() * crate::linalg::vec_norm(x), d * da * ax) {
            out.push("norm_of_image");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
        Matrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap()
    }

    fn scalar_two_atom() -> MatrixEnsemble {
        MatrixEnsemble::finite(vec![
            Atom { matrix: Matrix::scalar(0.25), p: 0.5 },
            Atom { matrix: Matrix::scalar(0.5), p: 0.5 },
        ])
        .unwrap()
    }

    #[test]
    fn constant_sample_is_the_matrix() {
        let e = MatrixEnsemble::constant(Matrix::scalar(0.5)).unwrap();
        let mut rng = rng::stream(1);
        for _ in 0..10 {
            assert_eq!(sample_matrix(&e, &mut rng), &Matrix::scalar(0.5));
        }
    }

    #[test]
    fn two_atom_frequencies_within_three_sigma() {
        let e = scalar_two_atom();
        let mut rng = rng::stream(2);
        let n = 10_000;
        let hits = (0..n).filter(|_| sample_index_of(&e, &mut rng) == 0).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((hits - 5000.0).abs() < 3.0 * sigma, "hits = {hits}");
    }

    fn sample_index_of(e: &MatrixEnsemble, rng: &mut rng::Stream) -> usize {
        e.sample_index(rng)
    }

    #[test]
    fn zero_mass_atom_never_drawn() {
        let e = MatrixEnsemble::finite(vec![
            Atom { matrix: Matrix::scalar(0.9), p: 0.0 },
            Atom { matrix: Matrix::scalar(0.1), p: 1.0 },
        ])
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5_000 {
            assert_eq!(sample_matrix(&e, &mut rng), &Matrix::scalar(0.1));
        }
    }

    #[test]
    fn ensemble_validation() {
        let bad_p = MatrixEnsemble::finite(vec![
            Atom { matrix: Matrix::scalar(0.5), p: 0.5 },
            Atom { matrix: Matrix::scalar(0.5), p: 0.4 },
        ]);
        assert!(bad_p.is_err());
        let negative = MatrixEnsemble::constant(Matrix::scalar(-0.5));
        assert!(negative.is_err());
        let mixed = MatrixEnsemble::finite(vec![
            Atom { matrix: Matrix::scalar(0.5), p: 0.5 },
            Atom { matrix: Matrix::identity(2), p: 0.5 },
        ]);
        assert!(matches!(mixed, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ensemble_json_literal() {
        let js = r#"{"dim": 1, "atoms": [{"matrix": [[0.25]], "p": 0.5}, {"matrix": [[0.5]], "p": 0.5}]}"#;
        let e: MatrixEnsemble = serde_json::from_str(js).unwrap();
        assert_eq!(e, scalar_two_atom());
        let wrong_dim = r#"{"dim": 2, "atoms": [{"matrix": [[0.25]], "p": 1.0}]}"#;
        assert!(serde_json::from_str::<MatrixEnsemble>(wrong_dim).is_err());
    }

    #[test]
    fn absorb_scalar_twice() {
        let s = LogProductState::new(1)
            .absorb(&Matrix::scalar(0.5))
            .unwrap()
            .absorb(&Matrix::scalar(0.5))
            .unwrap();
        assert_eq!(s.length(), 2);
        assert!((s.s() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((s.s() - 1.386294).abs() < 1e-6);
    }

    #[test]
    fn absorb_matches_direct_power() {
        let a = m2(0.3, 0.1, 0.2, 0.4);
        let mut s = LogProductState::new(2);
        for _ in 0..20 {
            s.absorb_in_place(&a).unwrap();
            assert!((s.normalized_product().norm_inf() - 1.0).abs() < 1e-12);
        }
        let direct = a.powi(20).norm_inf();
        assert!((s.log_norm() - direct.ln()).abs() < 20.0 * 1e-13);
        // −logNorm/20 sits just above ln 2 because ‖H‖ = 4/3.
        let rate = s.s() / 20.0;
        assert!(rate < 2f64.ln() && rate > 2f64.ln() - 0.02);
    }

    #[test]
    fn absorb_zero_matrix_fails() {
        let s = LogProductState::new(2);
        assert_eq!(s.absorb(&Matrix::zeros(2)), Err(Error::ZeroProduct));
    }

    #[test]
    fn lyapunov_constant_scalar_exact() {
        let e = MatrixEnsemble::constant(Matrix::scalar(0.5)).unwrap();
        let est = estimate_lyapunov(&e, LyapunovOptions::new(50, 4, 0)).unwrap();
        assert!((est.lambda_hat - 2f64.ln()).abs() < 1e-14);
        assert_eq!(est.half_width, 0.0);
    }

    #[test]
    fn lyapunov_constant_two_by_two() {
        let e = MatrixEnsemble::constant(m2(0.3, 0.1, 0.2, 0.4)).unwrap();
        let est = estimate_lyapunov(&e, LyapunovOptions::new(200, 2, 0)).unwrap();
        assert!((est.lambda_hat - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_scalar_two_atom_ci() {
        let e = scalar_two_atom();
        let est = estimate_lyapunov(&e, LyapunovOptions::new(2_000, 64, 5)).unwrap();
        let truth = 1.5 * 2f64.ln();
        assert!((truth - 1.039721).abs() < 1e-6);
        assert!(est.contains(truth), "{est:?}");
        assert_eq!(exact_lambda(&e), Some(truth));
    }

    #[test]
    fn lyapunov_rejects_zero_column() {
        let e = MatrixEnsemble::finite(vec![
            Atom { matrix: m2(0.5, 0.0, 0.5, 0.0), p: 0.5 },
            Atom { matrix: m2(0.5, 0.5, 0.5, 0.5), p: 0.5 },
        ])
        .unwrap();
        let res = estimate_lyapunov(&e, LyapunovOptions::new(10, 2, 0));
        assert!(matches!(res, Err(Error::DegenerateEnsemble(_))));
    }

    #[test]
    fn spectral_radius_examples() {
        assert!((spectral_radius(&Matrix::scalar(0.5)).unwrap().rho - 0.5).abs() < 1e-15);
        let p = spectral_radius(&m2(0.3, 0.1, 0.2, 0.4)).unwrap();
        let oracle = (0.7 + (0.49f64 - 0.40).sqrt()) / 2.0;
        assert!((oracle - 0.5).abs() < 1e-15);
        assert!((p.rho - oracle).abs() < 1e-11);
        // H = (1,2)ᵀ(1,1)/3
        let h = m2(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0);
        assert!(p.limit.max_abs_diff(&h) < 1e-10);
        assert_eq!(
            spectral_radius(&m2(0.0, 0.5, 0.5, 0.0)),
            Err(Error::NotPrimitive)
        );
    }

    #[test]
    fn perron_limit_is_reached() {
        let a = m2(0.3, 0.1, 0.2, 0.4);
        let p = spectral_radius(&a).unwrap();
        let scaled = a.powi(60).scale(p.rho.powi(-60));
        assert!(scaled.max_abs_diff(&p.limit) < 1e-10);
    }

    #[test]
    fn primitivity() {
        assert!(!is_primitive(&m2(0.0, 1.0, 1.0, 0.0)));
        assert!(is_primitive(&m2(0.0, 1.0, 1.0, 1.0)));
        assert!(is_primitive(&m2(1.0, 1.0, 1.0, 1.0)));
        assert!(!is_primitive(&m2(1.0, 1.0, 0.0, 1.0)));
        // Wielandt extremal pattern for d = 3 needs exactly (d−1)²+1 = 5 steps.
        let w = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(is_primitive(&w));
        assert!(!w.powi(4).is_positive());
        assert!(w.powi(5).is_positive());
    }

    #[test]
    fn check_pr_examples() {
        let pos = MatrixEnsemble::constant(m2(0.3, 0.1, 0.2, 0.4)).unwrap();
        assert_eq!(check_pr(&pos, 1).unwrap(), Some(0.1));

        let perm = m2(0.0, 1.0, 1.0, 0.0);
        let ones = m2(1.0, 1.0, 1.0, 1.0);
        let e = MatrixEnsemble::finite(vec![
            Atom { matrix: perm.clone(), p: 0.5 },
            Atom { matrix: ones.clone(), p: 0.5 },
        ])
        .unwrap();
        // Brute force over the four ordered pairs.
        let any_zero = [(&perm, &perm), (&perm, &ones), (&ones, &perm), (&ones, &ones)]
            .iter()
            .any(|(a, b)| !a.mul(b).is_positive());
        assert!(any_zero);
        assert_eq!(check_pr(&e, 2).unwrap(), None);
    }

    #[test]
    fn check_pr_budget() {
        let e = MatrixEnsemble::finite(
            (0..10)
                .map(|k| Atom { matrix: Matrix::scalar(0.1 + 0.01 * k as f64), p: 0.1 })
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            check_pr_with_budget(&e, 7, 1_000_000),
            Err(Error::SupportTooLarge { .. })
        ));
        assert!(check_pr_with_budget(&e, 6, 1_000_000).unwrap().is_some());
    }

    #[test]
    fn variation_inequalities_hold_on_examples() {
        let a = m2(0.5, 0.3, 0.2, 0.4);
        let b = m2(0.6, 0.2, 0.3, 0.5);
        assert!(variation_violations(&a, &b, &[1.0, 0.5]).is_empty());
        assert!(variation_violations(&a, &m2(1.0, 0.0, 0.0, 0.0), &[0.0, 1.0]).is_empty());
    }

    #[test]
    fn variation_stats_examples() {
        let v = variation_stats(&m2(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(v.mu, 3.0);
        assert_eq!(v.delta, 2.0);
        assert_eq!(v.big_delta, Some(3.0));

        let ones = Matrix::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let v = variation_stats(&ones).unwrap();
        assert_eq!((v.mu, v.delta, v.big_delta), (1.0, 3.0, Some(1.0)));

        assert_eq!(big_delta(&Matrix::identity(2)), Err(Error::NonPositive));
        assert_eq!(variation_stats(&Matrix::zeros(2)), Err(Error::ZeroMatrix));
    }
}
