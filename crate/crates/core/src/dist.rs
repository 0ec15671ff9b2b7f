//! Innovation and immigration laws.
//!
//! Every law describes the distribution of `‖Y₁‖` (for scalar laws, of `Y₁`
//! itself). Tails are evaluated natively rather than as `1 − cdf`, and
//! [`InnovationLaw::log_tail`] takes its argument on the log scale so that
//! thresholds such as `y·e^{mλ}` with `m` in the millions never overflow.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_util;

/// Largest table accepted by [`DiscreteTable`].
pub const MAX_TABLE_ATOMS: usize = 100_000;

/// Above this magnitude every `f64` is an integer, so flooring is a no-op.
const INTEGRAL_F64: f64 = 4_503_599_627_370_496.0; // 2^52

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationLaw {
    /// `P[ln(1+Y) > t] = (1+βt)^{−p}`.
    LogPareto { beta: f64, p: f64 },
    /// `P[Y > x] = min(1, a/x)`.
    ParetoTail { a: f64 },
    /// `P[Y = k] = q(1−q)^k` on `ℕ₀`.
    Geometric { q: f64 },
    Poisson { mean: f64 },
    DiscreteTable(DiscreteTable),
    Deterministic { value: f64 },
    /// `d` i.i.d. copies of a scalar law; `‖Y‖` is their maximum.
    ScaledVector {
        component: Box<InnovationLaw>,
        dim: usize,
    },
    /// Integer part `⌊V⌋` of a scalar law.
    Floor { inner: Box<InnovationLaw> },
}

/// Finite table of nonnegative values with probabilities, given as parallel
/// arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableLiteral", into = "TableLiteral")]
pub struct DiscreteTable {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// `upper[k] = Σ_{i ≥ k} probs[i]`, with a trailing 0.
    upper: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableLiteral {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<TableLiteral> for DiscreteTable {
    type Error = Error;
    fn try_from(lit: TableLiteral) -> Result<Self> {
        DiscreteTable::new(lit.values, lit.probs)
    }
}

impl From<DiscreteTable> for TableLiteral {
    fn from(t: DiscreteTable) -> Self {
        TableLiteral {
            values: t.values,
            probs: t.probs,
        }
    }
}

impl DiscreteTable {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::InvalidLaw("values and probs differ in length".into()));
        }
        if values.is_empty() || values.len() > MAX_TABLE_ATOMS {
            return Err(Error::InvalidLaw(format!(
                "table needs between 1 and {MAX_TABLE_ATOMS} atoms"
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidLaw("table values must be finite and nonnegative".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidLaw("table probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!("table probabilities sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        let mut upper = vec![0.0; probs.len() + 1];
        for k in (0..probs.len()).rev() {
            upper[k] = upper[k + 1] + probs[k];
        }
        Ok(DiscreteTable {
            values,
            probs,
            cumulative,
            upper,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn tail(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        self.upper[k].min(1.0)
    }

    fn tail_ge(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < x);
        self.upper[k].min(1.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Finite law on the real line, used for the drift `T` of exchange processes
/// and the cookie-walk environment `ω`. In JSON either a bare number (a point
/// mass) or `{"values": [...], "probs": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteLiteral", into = "FiniteLiteral")]
pub struct FiniteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FiniteLiteral {
    Constant(f64),
    Table { values: Vec<f64>, probs: Vec<f64> },
}

impl TryFrom<FiniteLiteral> for FiniteLaw {
    type Error = Error;
    fn try_from(lit: FiniteLiteral) -> Result<Self> {
        match lit {
            FiniteLiteral::Constant(v) => FiniteLaw::new(vec![v], vec![1.0]),
            FiniteLiteral::Table { values, probs } => FiniteLaw::new(values, probs),
        }
    }
}

impl From<FiniteLaw> for FiniteLiteral {
    fn from(l: FiniteLaw) -> Self {
        if l.values.len() == 1 {
            FiniteLiteral::Constant(l.values[0])
        } else {
            FiniteLiteral::Table {
                values: l.values,
                probs: l.probs,
            }
        }
    }
}

impl FiniteLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidLaw("finite law needs matching nonempty values and probs".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidLaw("finite law needs finite values and nonnegative probs".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!("finite law probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(FiniteLaw {
            values,
            probs,
            cumulative,
        })
    }

    pub fn constant(v: f64) -> Self {
        FiniteLaw::new(vec![v], vec![1.0]).expect("finite constant")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E[f(V)]`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(v, p)| p * f(*v))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    /// Smallest and largest value carrying mass.
    pub fn support_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| (lo.min(*v), hi.max(*v)))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Whether a moment is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentClass {
    Finite,
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Yes,
    No,
    Unknown,
}

/// Analytic tail metadata.
///
/// From [`InnovationLaw::tail_class`] the moment is `E[ln₊‖Y₁‖]` and the
/// limits are those of `t·P[ln‖Y₁‖ > t]`; from
/// [`InnovationLaw::linear_tail_class`] the moment is `E[W]` and the limits
/// are those of `x·P[W > x]`. `None` means unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailClass {
    pub log_moment_finite: MomentClass,
    pub reg_satisfied: Regularity,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub limsup_t_ln_tail: Option<f64>,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub liminf_t_ln_tail: Option<f64>,
}

impl TailClass {
    fn finite() -> Self {
        TailClass {
            log_moment_finite: MomentClass::Finite,
            reg_satisfied: Regularity::Yes,
            limsup_t_ln_tail: Some(0.0),
            liminf_t_ln_tail: Some(0.0),
        }
    }

    fn infinite(limit: f64) -> Self {
        TailClass {
            log_moment_finite: MomentClass::Infinite,
            reg_satisfied: Regularity::Yes,
            limsup_t_ln_tail: Some(limit),
            liminf_t_ln_tail: Some(limit),
        }
    }

    pub fn unknown() -> Self {
        TailClass {
            log_moment_finite: MomentClass::Unknown,
            reg_satisfied: Regularity::Unknown,
            limsup_t_ln_tail: None,
            liminf_t_ln_tail: None,
        }
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.limsup_t_ln_tail = self.limsup_t_ln_tail.map(|v| v * factor);
        self.liminf_t_ln_tail = self.liminf_t_ln_tail.map(|v| v * factor);
        self
    }
}

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Above `2^52` every `f64` is an integer, so flooring is the identity.
const FLOOR_EXACT_LN: f64 = 36.04;

/// `ln(eᵗ − 1)` for `t ≥ 0`.
fn ln_expm1(t: f64) -> f64 {
    if t > 30.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

fn poisson_ln_pmf(k: f64, mean: f64) -> f64 {
    -mean + k * mean.ln() - statrs::function::gamma::ln_gamma(k + 1.0)
}

/// `P[Y ≥ k]` for `Y ~ Poisson(mean)` and integer `k ≥ 1`.
fn poisson_upper(k0: f64, mean: f64) -> f64 {
    if mean == 0.0 || k0.is_infinite() {
        return 0.0;
    }
    if k0 > mean {
        let mut term = poisson_ln_pmf(k0, mean).exp();
        let mut sum = 0.0;
        let mut k = k0;
        while term > 0.0 && term > sum * 1e-17 {
            sum += term;
            term *= mean / (k + 1.0);
            k += 1.0;
        }
        sum.min(1.0)
    } else {
        let lower: f64 = (0..k0 as u64)
            .map(|k| poisson_ln_pmf(k as f64, mean).exp())
            .sum();
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

impl InnovationLaw {
    pub fn log_pareto(beta: f64, p: f64) -> Self {
        InnovationLaw::LogPareto { beta, p }
    }

    pub fn pareto_tail(a: f64) -> Self {
        InnovationLaw::ParetoTail { a }
    }

    pub fn geometric(q: f64) -> Self {
        InnovationLaw::Geometric { q }
    }

    pub fn poisson(mean: f64) -> Self {
        InnovationLaw::Poisson { mean }
    }

    pub fn deterministic(value: f64) -> Self {
        InnovationLaw::Deterministic { value }
    }

    pub fn table(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Ok(InnovationLaw::DiscreteTable(DiscreteTable::new(values, probs)?))
    }

    pub fn scaled_vector(component: InnovationLaw, dim: usize) -> Self {
        InnovationLaw::ScaledVector {
            component: Box::new(component),
            dim,
        }
    }

    /// The law of `⌊V⌋`.
    pub fn floored(self) -> Self {
        if self.is_integer_valued() {
            self
        } else {
            InnovationLaw::Floor { inner: Box::new(self) }
        }
    }

    pub fn validate(&self) -> Result<()> {
        use InnovationLaw::*;
        let bad = |m: String| Err(Error::InvalidLaw(m));
        match self {
            LogPareto { beta, p } if !(*beta > 0.0 && *p > 0.0 && beta.is_finite() && p.is_finite()) => {
                bad(format!("log_pareto needs beta > 0 and p > 0, got beta={beta}, p={p}"))
            }
            ParetoTail { a } if !(*a > 0.0 && a.is_finite()) => bad(format!("pareto_tail needs a > 0, got {a}")),
            Geometric { q } if !(*q > 0.0 && *q < 1.0) => bad(format!("geometric needs q in (0,1), got {q}")),
            Poisson { mean } if !(*mean >= 0.0 && *mean < 1e15) => bad(format!("poisson mean {mean} out of range")),
            Deterministic { value } if !(*value >= 0.0 && value.is_finite()) => {
                bad(format!("deterministic value {value} must be finite and nonnegative"))
            }
            ScaledVector { component, dim } => {
                if *dim == 0 {
                    return bad("scaled_vector needs dim >= 1".into());
                }
                if component.dim() != 1 {
                    return bad("scaled_vector component must be scalar".into());
                }
                component.validate()
            }
            Floor { inner } => {
                if inner.dim() != 1 {
                    return bad("floor needs a scalar inner law".into());
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// Dimension of the innovation vector.
    pub fn dim(&self) -> usize {
        match self {
            InnovationLaw::ScaledVector { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        use InnovationLaw::*;
        match self {
            Geometric { .. } | Poisson { .. } | Floor { .. } => true,
            Deterministic { value } => value.fract() == 0.0,
            DiscreteTable(t) => t.values.iter().all(|v| v.fract() == 0.0),
            ScaledVector { component, .. } => component.is_integer_valued(),
            LogPareto { .. } | ParetoTail { .. } => false,
        }
    }

    /// `P[‖Y‖ > x]`.
    pub fn tail(&self, x: f64) -> f64 {
        use InnovationLaw::*;
        if x < 0.0 {
            return 1.0;
        }
        match self {
            LogPareto { beta, p } => (1.0 + beta * x.ln_1p()).powf(-p),
            ParetoTail { a } => {
                if x <= *a {
                    1.0
                } else {
                    a / x
                }
            }
            Geometric { q } => ((x.floor() + 1.0) * (-q).ln_1p()).exp(),
            Poisson { mean } => poisson_upper(x.floor() + 1.0, *mean),
            DiscreteTable(t) => t.tail(x),
            Deterministic { value } => {
                if x < *value {
                    1.0
                } else {
                    0.0
                }
            }
            ScaledVector { component, dim } => lift_tail(component.tail(x), *dim),
            Floor { inner } => inner.tail_ge(x.floor() + 1.0),
        }
    }

    /// `P[‖Y‖ ≤ x]`, defined as `1 − tail(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    /// `P[‖Y‖ ≥ x]`.
    pub fn tail_ge(&self, x: f64) -> f64 {
        use InnovationLaw::*;
        if x <= 0.0 {
            return 1.0;
        }
        match self {
            LogPareto { .. } | ParetoTail { .. } => self.tail(x),
            Geometric { q } => (x.ceil() * (-q).ln_1p()).exp(),
            Poisson { mean } => poisson_upper(x.ceil(), *mean),
            DiscreteTable(t) => t.tail_ge(x),
            Deterministic { value } => {
                if x <= *value {
                    1.0
                } else {
                    0.0
                }
            }
            ScaledVector { component, dim } => lift_tail(component.tail_ge(x), *dim),
            Floor { inner } => inner.tail_ge(x.ceil()),
        }
    }

    /// `P[‖Y‖ > e^s]`, accurate for arbitrarily large `s`.
    pub fn log_tail(&self, s: f64) -> f64 {
        use InnovationLaw::*;
        match self {
            LogPareto { beta, p } => (1.0 + beta * softplus(s)).powf(-p),
            ParetoTail { a } => {
                let la = a.ln();
                if s <= la {
                    1.0
                } else {
                    (la - s).exp()
                }
            }
            ScaledVector { component, dim } => lift_tail(component.log_tail(s), *dim),
            Floor { inner } => {
                let x = s.exp();
                if x >= INTEGRAL_F64 {
                    inner.log_tail(s)
                } else {
                    inner.tail_ge(x.floor() + 1.0)
                }
            }
            _ => self.tail(s.exp()),
        }
    }

    /// `F(s) = P[ln‖Y‖ ≤ s]`.
    pub fn log_cdf(&self, s: f64) -> f64 {
        1.0 - self.log_tail(s)
    }

    /// Draws `‖Y‖` (the value itself for scalar laws) by inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use InnovationLaw::*;
        match self {
            LogPareto { beta, p } => {
                let t = (open_unit(rng).powf(-1.0 / p) - 1.0) / beta;
                t.exp_m1()
            }
            ParetoTail { a } => a / open_unit(rng),
            Geometric { q } => (open_unit(rng).ln() / (-q).ln_1p()).floor(),
            Poisson { mean } => {
                if *mean == 0.0 {
                    0.0
                } else {
                    rand_distr::Poisson::new(*mean)
                        .expect("validated poisson mean")
                        .sample(rng)
                }
            }
            DiscreteTable(t) => t.sample(rng),
            Deterministic { value } => *value,
            ScaledVector { component, dim } => (0..*dim)
                .map(|_| component.sample(rng))
                .fold(0.0, f64::max),
            Floor { inner } => inner.sample(rng).floor(),
        }
    }

    /// Draws `ln‖Y‖` without passing through `‖Y‖`, so laws whose draws
    /// overflow `f64` stay finite. Zero maps to `−inf`.
    pub fn sample_ln<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use InnovationLaw::*;
        match self {
            LogPareto { beta, p } => {
                let t = (open_unit(rng).powf(-1.0 / p) - 1.0) / beta;
                ln_expm1(t)
            }
            ParetoTail { a } => a.ln() - open_unit(rng).ln(),
            ScaledVector { component, dim } => (0..*dim)
                .map(|_| component.sample_ln(rng))
                .fold(f64::NEG_INFINITY, f64::max),
            Floor { inner } => {
                let l = inner.sample_ln(rng);
                if l < FLOOR_EXACT_LN {
                    l.exp().floor().ln()
                } else {
                    l
                }
            }
            _ => self.sample(rng).ln(),
        }
    }

    /// Componentwise `ln Y`, the log-domain counterpart of
    /// [`sample_vector`](Self::sample_vector).
    pub fn sample_ln_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            InnovationLaw::ScaledVector { component, dim } => {
                (0..*dim).map(|_| component.sample_ln(rng)).collect()
            }
            _ => vec![self.sample_ln(rng)],
        }
    }

    /// Draws the innovation vector `Y` (length [`dim`](Self::dim)).
    pub fn sample_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            InnovationLaw::ScaledVector { component, dim } => {
                (0..*dim).map(|_| component.sample(rng)).collect()
            }
            _ => vec![self.sample(rng)],
        }
    }

    /// Log-scale tail metadata of `‖Y‖`.
    pub fn tail_class(&self) -> TailClass {
        use InnovationLaw::*;
        match self {
            LogPareto { beta, p } => {
                if *p > 1.0 {
                    TailClass::finite()
                } else if *p == 1.0 {
                    TailClass::infinite(1.0 / beta)
                } else {
                    TailClass::infinite(f64::INFINITY)
                }
            }
            ParetoTail { .. } | Geometric { .. } | Poisson { .. } | Deterministic { .. } => {
                TailClass::finite()
            }
            DiscreteTable(_) => TailClass::unknown(),
            ScaledVector { component, dim } => component.tail_class().scaled(*dim as f64),
            Floor { inner } => inner.tail_class(),
        }
    }

    /// Linear-scale tail metadata of `W = ‖Y‖`: finiteness of `E[W]` and the
    /// limits of `x·P[W > x]`.
    pub fn linear_tail_class(&self) -> TailClass {
        use InnovationLaw::*;
        match self {
            LogPareto { .. } => TailClass::infinite(f64::INFINITY),
            ParetoTail { a } => TailClass::infinite(*a),
            Geometric { .. } | Poisson { .. } | Deterministic { .. } => TailClass::finite(),
            DiscreteTable(_) => TailClass::unknown(),
            ScaledVector { component, dim } => component.linear_tail_class().scaled(*dim as f64),
            Floor { inner } => inner.linear_tail_class(),
        }
    }

    /// `inf{x ≥ 0 : cdf(x) ≥ prob}` by bisection on the log scale.
    pub fn quantile(&self, prob: f64) -> f64 {
        if self.cdf(0.0) >= prob {
            return 0.0;
        }
        let mut lo = -745.0;
        if self.log_cdf(lo) >= prob {
            return 0.0;
        }
        let mut hi: f64 = 1.0;
        while self.log_cdf(hi) < prob {
            hi *= 2.0;
            if hi > 1e6 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.log_cdf(mid) >= prob {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x = hi.exp();
        if self.is_integer_valued() && self.cdf(x.floor()) >= prob {
            x.floor()
        } else {
            x
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

/// `P[max of d i.i.d. > x]` from the single-component tail.
fn lift_tail(t: f64, dim: usize) -> f64 {
    if t >= 1.0 {
        return 1.0;
    }
    -((dim as f64) * (-t).ln_1p()).exp_m1()
}

/// Kolmogorov–Smirnov distance between a sample and the law of `‖Y‖`,
/// exact for both continuous and discrete laws. Draws that overflowed to
/// `+inf` stand for the mass above `f64::MAX`.
pub fn ks_statistic(samples: &[f64], law: &InnovationLaw) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        let lo = if v == f64::INFINITY { f64::MAX } else { v };
        d = d.max((below - (1.0 - law.tail_ge(lo))).abs());
        d = d.max((at - law.cdf(v)).abs());
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn log_samples_match_the_tail() {
        let law = InnovationLaw::log_pareto(1.0, 0.5);
        let mut r = rng::stream(4);
        let n = 100_000;
        let big = (0..n).filter(|_| law.sample_ln(&mut r) > 800.0).count() as f64 / n as f64;
        let want = law.log_tail(800.0);
        assert!((big - want).abs() < 4.0 * (want / n as f64).sqrt(), "{big} vs {want}");
        assert_eq!(InnovationLaw::deterministic(0.0).sample_ln(&mut r), f64::NEG_INFINITY);
        let fl = InnovationLaw::log_pareto(1.0, 2.0).floored();
        for _ in 0..1000 {
            let l = fl.sample_ln(&mut r);
            assert!(l == f64::NEG_INFINITY || l >= 0.0);
        }
    }

    #[test]
    fn log_pareto_tail_value() {
        let law = InnovationLaw::log_pareto(1.0, 1.0);
        // P[ln(1+Y) > 3] = P[Y > e³ − 1]
        let x = 3f64.exp() - 1.0;
        assert!((law.tail(x) - 0.25).abs() < 1e-15);
        assert!((law.cdf(x) + law.tail(x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_pareto() {
        let det = InnovationLaw::deterministic(5.0);
        assert_eq!(det.cdf(4.9), 0.0);
        assert_eq!(det.cdf(5.0), 1.0);
        assert_eq!(InnovationLaw::pareto_tail(2.0).tail(8.0), 0.25);
    }

    #[test]
    fn log_tail_agrees_with_tail_and_survives_overflow() {
        let laws = [
            InnovationLaw::log_pareto(0.5, 1.5),
            InnovationLaw::pareto_tail(3.0),
            InnovationLaw::geometric(0.3),
            InnovationLaw::poisson(4.0),
            InnovationLaw::scaled_vector(InnovationLaw::log_pareto(1.0, 1.0), 3),
            InnovationLaw::log_pareto(1.0, 1.0).floored(),
        ];
        for law in &laws {
            for s in [-2.0, 0.0, 0.7, 3.0, 10.0] {
                let a = law.log_tail(s);
                let b = law.tail(s.exp());
                assert!((a - b).abs() < 1e-12, "{law:?} at {s}: {a} vs {b}");
            }
        }
        // e^{10^6} overflows; the log-scale tail stays finite and positive.
        let lp = InnovationLaw::log_pareto(1.0, 1.0);
        let t = lp.log_tail(1e6);
        assert!((t - 1.0 / (1.0 + 1e6)).abs() < 1e-15);
    }

    #[test]
    fn floor_law_tails() {
        // ⌊ParetoTail(c)⌋ has P[W > m] = min(1, c/(m+1)) on integers.
        let w = InnovationLaw::pareto_tail(0.5).floored();
        for m in 0..20 {
            let expected = (0.5 / (m as f64 + 1.0)).min(1.0);
            assert!((w.tail(m as f64) - expected).abs() < 1e-15);
        }
        assert!((w.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!(w.is_integer_valued());
        // Integer-valued laws are unchanged by flooring.
        assert_eq!(InnovationLaw::geometric(0.5).floored(), InnovationLaw::geometric(0.5));
    }

    #[test]
    fn poisson_tail_sums() {
        let law = InnovationLaw::poisson(2.0);
        let p0 = (-2.0f64).exp();
        assert!((law.cdf(0.0) - p0).abs() < 1e-15);
        assert!((law.cdf(1.0) - 3.0 * p0).abs() < 1e-15);
        assert!((law.tail(1.5) - (1.0 - 3.0 * p0)).abs() < 1e-14);
        assert_eq!(law.tail_ge(1.0), law.tail(0.0));
        assert!(law.tail(1e300) == 0.0);
        assert_eq!(InnovationLaw::poisson(0.0).tail(0.0), 0.0);
    }

    #[test]
    fn table_parallel_arrays_json() {
        let js = r#"{"kind":"discrete_table","values":[2.0,0.0,1.0],"probs":[0.2,0.5,0.3]}"#;
        let law: InnovationLaw = serde_json::from_str(js).unwrap();
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((law.cdf(1.0) - 0.8).abs() < 1e-15);
        assert_eq!(law.cdf(2.0), 1.0);
        assert!((law.tail_ge(1.0) - 0.5).abs() < 1e-15);
        let bad = r#"{"kind":"discrete_table","values":[0.0],"probs":[0.4]}"#;
        assert!(serde_json::from_str::<InnovationLaw>(bad).is_err());
    }

    #[test]
    fn law_json_shapes() {
        let law: InnovationLaw = serde_json::from_str(r#"{"kind":"log_pareto","beta":1.0,"p":2.0}"#).unwrap();
        assert_eq!(law, InnovationLaw::log_pareto(1.0, 2.0));
        let nested: InnovationLaw = serde_json::from_str(
            r#"{"kind":"floor","inner":{"kind":"pareto_tail","a":2.0}}"#,
        )
        .unwrap();
        assert_eq!(nested, InnovationLaw::pareto_tail(2.0).floored());
    }

    #[test]
    fn validation() {
        assert!(InnovationLaw::log_pareto(0.0, 1.0).validate().is_err());
        assert!(InnovationLaw::geometric(1.0).validate().is_err());
        assert!(InnovationLaw::deterministic(-1.0).validate().is_err());
        assert!(InnovationLaw::scaled_vector(InnovationLaw::geometric(0.5), 0).validate().is_err());
        assert!(InnovationLaw::geometric(0.5).validate().is_ok());
    }

    #[test]
    fn tail_class_examples() {
        let c = InnovationLaw::log_pareto(1.0, 2.0).tail_class();
        assert_eq!(c.log_moment_finite, MomentClass::Finite);
        assert_eq!(c.limsup_t_ln_tail, Some(0.0));

        let c = InnovationLaw::log_pareto(0.5, 1.0).tail_class();
        assert_eq!(c.log_moment_finite, MomentClass::Infinite);
        assert_eq!(c.limsup_t_ln_tail, Some(2.0));
        assert_eq!(c.liminf_t_ln_tail, Some(2.0));
        // Oracle: t·(1+0.5t)^{-1} → 2.
        let t: f64 = 1e9;
        assert!((t / (1.0 + 0.5 * t) - 2.0).abs() < 1e-8);

        let c = InnovationLaw::geometric(0.5).tail_class();
        assert_eq!(c.log_moment_finite, MomentClass::Finite);
        assert_eq!(c.limsup_t_ln_tail, Some(0.0));

        let c = InnovationLaw::table(vec![1.0], vec![1.0]).unwrap().tail_class();
        assert_eq!(c, TailClass::unknown());
    }

    #[test]
    fn finite_log_moment_means_zero_limsup() {
        let laws = [
            InnovationLaw::log_pareto(1.0, 3.0),
            InnovationLaw::pareto_tail(1.0),
            InnovationLaw::poisson(3.0),
            InnovationLaw::deterministic(2.0),
            InnovationLaw::geometric(0.2).floored(),
        ];
        for law in laws {
            let c = law.tail_class();
            assert_eq!(c.log_moment_finite, MomentClass::Finite);
            assert_eq!(c.limsup_t_ln_tail, Some(0.0));
        }
    }

    #[test]
    fn quantiles() {
        assert_eq!(InnovationLaw::geometric(0.5).median(), 0.0);
        let m = InnovationLaw::log_pareto(1.0, 1.0).median();
        assert!((m - (1f64.exp() - 1.0)).abs() < 1e-9);
        assert_eq!(InnovationLaw::deterministic(0.0).median(), 0.0);
        assert_eq!(InnovationLaw::poisson(3.0).median(), 3.0);
    }

    #[test]
    fn finite_law_json_and_moments() {
        let c: FiniteLaw = serde_json::from_str("0.4").unwrap();
        assert_eq!(c.mean(), 0.4);
        let t: FiniteLaw = serde_json::from_str(r#"{"values":[1.0,3.0],"probs":[0.5,0.5]}"#).unwrap();
        assert_eq!(t.mean(), 2.0);
        assert_eq!(t.support_range(), (1.0, 3.0));
        assert!(serde_json::from_str::<FiniteLaw>(r#"{"values":[1.0],"probs":[0.5]}"#).is_err());
    }

    #[test]
    fn ks_small_sample_sanity() {
        let law = InnovationLaw::geometric(0.5);
        let mut rng = rng::stream(4);
        let xs: Vec<f64> = (0..20_000).map(|_| law.sample(&mut rng)).collect();
        assert!(ks_statistic(&xs, &law) < 1.95 / (20_000f64).sqrt());
        // A wrong law is far away.
        assert!(ks_statistic(&xs, &InnovationLaw::geometric(0.3)) > 0.1);
    }
}
