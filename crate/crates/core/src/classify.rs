//! Recurrence and transience verdicts from product-form series.
//!
//! Every criterion here has the shape `Σ_n Π_{m≤n} f_m = ∞` with factors
//! `f_m = P[‖Y₁‖ ≤ y·e^{mλ}]` (log thresholds) or `f_m = P[W ≤ y + m·t̄]`
//! (linear thresholds). Partial products are accumulated as
//! `ln a_n = Σ ln f_m` and divergence is decided from the Raabe statistic
//! `r_n = n·(1 − f_n)`: a limit below 1 means the series diverges
//! (recurrence), above 1 that it converges (transience).

use serde::Serialize;

use crate::dist::{FiniteLaw, InnovationLaw, MomentClass, Regularity, TailClass};
use crate::error::{Error, Result};
use crate::matrix_env::{estimate_lyapunov, exact_lambda, LyapunovOptions, MatrixEnsemble};
use crate::processes::frog;
use crate::serde_util;

pub const DEFAULT_N_MAX: u64 = 1_000_000;
pub const DEFAULT_TAU: f64 = 0.05;
/// Minimum coefficient of determination for the ln ln refinement.
pub const BERTRAND_MIN_R2: f64 = 0.999;
/// Departure of the fitted power from 1 that settles the refinement.
pub const BERTRAND_ALPHA_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    PositiveRecurrent,
    Recurrent,
    Transient,
    Inconclusive,
}

impl Outcome {
    pub fn is_recurrent(self) -> bool {
        matches!(self, Outcome::PositiveRecurrent | Outcome::Recurrent)
    }

    pub fn is_resolved(self) -> bool {
        self != Outcome::Inconclusive
    }

    /// Same side of the recurrence/transience divide.
    pub fn agrees_with(self, other: Outcome) -> bool {
        self.is_recurrent() == other.is_recurrent() && self.is_resolved() == other.is_resolved()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    /// `f_m = P[‖Y‖ ≤ e^{ln_y + mλ}]`.
    Log { ln_y: f64, lambda: f64 },
    /// `f_m = P[W ≤ y + m·step]`.
    Linear { y: f64, step: f64 },
}

/// What a finite moment lets the ladder conclude without the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shortcut {
    PositiveRecurrent,
    Recurrent,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    Supplied,
    Analytic,
    SpectralRadius,
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub law: InnovationLaw,
    pub threshold: Threshold,
    pub n_max: u64,
    pub tau: f64,
    pub shortcut: Shortcut,
    pub lambda_source: LambdaSource,
    pub lambda_half_width: Option<f64>,
}

impl SeriesSpec {
    /// Factors `P[‖Y₁‖ ≤ y·e^{mλ}]`.
    pub fn log(law: InnovationLaw, y: f64, lambda: f64) -> Self {
        SeriesSpec {
            law,
            threshold: Threshold::Log { ln_y: y.ln(), lambda },
            n_max: DEFAULT_N_MAX,
            tau: DEFAULT_TAU,
            shortcut: Shortcut::PositiveRecurrent,
            lambda_source: LambdaSource::Supplied,
            lambda_half_width: None,
        }
    }

    /// Factors `P[W ≤ y + m·step]`.
    pub fn linear(law: InnovationLaw, y: f64, step: f64) -> Self {
        SeriesSpec {
            law,
            threshold: Threshold::Linear { y, step },
            n_max: DEFAULT_N_MAX,
            tau: DEFAULT_TAU,
            shortcut: Shortcut::Recurrent,
            lambda_source: LambdaSource::Supplied,
            lambda_half_width: None,
        }
    }

    pub fn with_options(mut self, opts: SeriesOptions) -> Self {
        self.n_max = opts.n_max;
        self.tau = opts.tau;
        self
    }

    pub fn with_shortcut(mut self, shortcut: Shortcut) -> Self {
        self.shortcut = shortcut;
        self
    }

    pub fn with_lambda_source(mut self, source: LambdaSource, half_width: Option<f64>) -> Self {
        self.lambda_source = source;
        self.lambda_half_width = half_width;
        self
    }

    pub fn anchor(&self) -> f64 {
        match self.threshold {
            Threshold::Log { ln_y, .. } => ln_y.exp(),
            Threshold::Linear { y, .. } => y,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.threshold {
            Threshold::Log { lambda, .. } => Some(lambda),
            Threshold::Linear { .. } => None,
        }
    }

    fn with_lambda(&self, lambda: f64) -> Self {
        let mut s = self.clone();
        if let Threshold::Log { ln_y, .. } = self.threshold {
            s.threshold = Threshold::Log { ln_y, lambda };
        }
        s
    }

    fn with_anchor(&self, y: f64) -> Self {
        let mut s = self.clone();
        s.threshold = match self.threshold {
            Threshold::Log { lambda, .. } => Threshold::Log { ln_y: y.ln(), lambda },
            Threshold::Linear { step, .. } => Threshold::Linear { y, step },
        };
        s
    }

    /// `1 − f_m`.
    pub fn miss(&self, m: u64) -> f64 {
        match self.threshold {
            Threshold::Log { ln_y, lambda } => self.law.log_tail(ln_y + m as f64 * lambda),
            Threshold::Linear { y, step } => self.law.tail(y + m as f64 * step),
        }
    }

    fn tail_class(&self) -> TailClass {
        match self.threshold {
            Threshold::Log { .. } => self.law.tail_class(),
            Threshold::Linear { .. } => self.law.linear_tail_class(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if self.n_max < 100 {
            return Err(Error::config("n_max", "must be at least 100"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::config("tau", "must lie in (0,1)"));
        }
        match self.threshold {
            Threshold::Log { ln_y, lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::config("lambda", format!("must be positive and finite, got {lambda}")));
                }
                if ln_y.is_nan() || ln_y == f64::INFINITY {
                    return Err(Error::config("y", "anchor must be positive and finite"));
                }
            }
            Threshold::Linear { y, step } => {
                if !(step > 0.0) {
                    return Err(Error::NonpositiveDrift(step));
                }
                if !y.is_finite() {
                    return Err(Error::config("y", "anchor must be finite"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesOptions {
    pub n_max: u64,
    pub tau: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            n_max: DEFAULT_N_MAX,
            tau: DEFAULT_TAU,
        }
    }
}

/// Least-squares fit of `ln a_n = c − α·ln n − γ·ln ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BertrandFit {
    pub alpha: f64,
    pub gamma: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorResult {
    pub y: f64,
    pub outcome: Option<Outcome>,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub raabe_limit: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// What the series alone says, ignoring the moment shortcut.
    pub series_outcome: Outcome,
    pub rationale: String,
    /// `[n, r_n]` pairs on a log-spaced grid.
    pub raabe_tail: Vec<(u64, f64)>,
    /// `[n, ln a_n]` pairs on the same grid.
    pub partial_sum_log: Vec<(u64, f64)>,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub raabe_limit: Option<f64>,
    pub bertrand: Option<BertrandFit>,
    pub anchors: Vec<AnchorResult>,
    pub flags: Vec<String>,
    pub y: f64,
    pub lambda: Option<f64>,
    pub lambda_source: LambdaSource,
    pub lambda_half_width: Option<f64>,
    /// Number of factors evaluated.
    pub terms: u64,
}

/// Trace indices: every `n ≤ 10` and then ten per decade, plus `n_max`.
fn trace_grid(n_max: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=10.min(n_max)).collect();
    let mut k = 1.0f64;
    loop {
        let n = (10f64.powf(1.0 + k / 10.0)).round() as u64;
        if n >= n_max {
            break;
        }
        grid.push(n);
        k += 1.0;
    }
    grid.push(n_max);
    grid.dedup();
    grid
}

fn bertrand_grid(n_max: u64) -> Vec<u64> {
    let lo = (n_max as f64 / 1000.0).max(20.0);
    let hi = n_max as f64;
    let pts = 60;
    let mut g: Vec<u64> = (0..pts)
        .map(|k| (lo * (hi / lo).powf(k as f64 / (pts - 1) as f64)).round() as u64)
        .collect();
    g.dedup();
    g
}

/// Solves the 3×3 normal equations of an ordinary least-squares fit.
fn least_squares3(rows: &[[f64; 3]], ys: &[f64]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for (r, y) in rows.iter().zip(ys) {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += r[i] * r[j];
            }
            m[i][3] += r[i] * y;
        }
    }
    for c in 0..3 {
        let p = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        m.swap(c, p);
        if m[c][c].abs() < 1e-300 {
            return None;
        }
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

fn bertrand_fit(points: &[(u64, f64)]) -> Option<BertrandFit> {
    let rows: Vec<[f64; 3]> = points
        .iter()
        .map(|&(n, _)| {
            let ln = (n as f64).ln();
            [1.0, -ln, -ln.ln()]
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let beta = least_squares3(&rows, &ys)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = rows
        .iter()
        .zip(&ys)
        .map(|(r, y)| (y - (beta[0] * r[0] + beta[1] * r[1] + beta[2] * r[2])).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(BertrandFit {
        alpha: beta[1],
        gamma: beta[2],
        r2,
    })
}

struct SeriesRun {
    outcome: Outcome,
    rationale: String,
    raabe_tail: Vec<(u64, f64)>,
    partial_sum_log: Vec<(u64, f64)>,
    raabe_limit: Option<f64>,
    bertrand: Option<BertrandFit>,
    terms: u64,
}

fn run_series(spec: &SeriesSpec) -> Result<SeriesRun> {
    let q0 = spec.miss(0);
    if !(q0 < 1.0) {
        return Err(Error::ZeroAnchor { y: spec.anchor() });
    }
    let n_max = spec.n_max;
    let trace = trace_grid(n_max);
    let bert = bertrand_grid(n_max);
    let window_start = n_max / 10;
    let mut window: Vec<f64> = Vec::with_capacity((n_max - window_start + 1) as usize);
    let mut raabe_tail = Vec::with_capacity(trace.len());
    let mut partial_sum_log = Vec::with_capacity(trace.len());
    let mut bert_points = Vec::with_capacity(bert.len());
    let (mut ti, mut bi) = (0usize, 0usize);
    let mut log_a = 0.0f64;
    for n in 0..=n_max {
        let q = if n == 0 { q0 } else { spec.miss(n) };
        let next = log_a + (-q).ln_1p();
        assert!(next <= log_a, "partial products must be nonincreasing");
        log_a = next;
        let r = n as f64 * q;
        if ti < trace.len() && trace[ti] == n {
            raabe_tail.push((n, r));
            partial_sum_log.push((n, log_a));
            ti += 1;
        }
        if bi < bert.len() && bert[bi] == n {
            bert_points.push((n, log_a));
            bi += 1;
        }
        if n >= window_start {
            window.push(r);
        }
        if q == 0.0 {
            // Thresholds only grow, so every later factor is exactly 1.
            raabe_tail.push((n, 0.0));
            partial_sum_log.push((n, log_a));
            raabe_tail.dedup();
            partial_sum_log.dedup();
            return Ok(SeriesRun {
                outcome: Outcome::Recurrent,
                rationale: format!("factors equal 1 from m = {n} on, so the partial products stay at e^{log_a:.6}"),
                raabe_tail,
                partial_sum_log,
                raabe_limit: Some(0.0),
                bertrand: None,
                terms: n + 1,
            });
        }
    }
    let mid = window.len() / 2;
    let (_, median, _) = window.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let l = *median;
    let tau = spec.tau;
    let (outcome, rationale, bertrand) = if l < 1.0 - tau {
        (Outcome::Recurrent, format!("Raabe limit {l:.6} < 1 - tau: series diverges"), None)
    } else if l > 1.0 + tau {
        (Outcome::Transient, format!("Raabe limit {l:.6} > 1 + tau: series converges"), None)
    } else {
        match bertrand_fit(&bert_points) {
            Some(fit) if fit.r2 >= BERTRAND_MIN_R2 => {
                let (o, why) = if (fit.alpha - 1.0).abs() > BERTRAND_ALPHA_TOL {
                    if fit.alpha > 1.0 {
                        (Outcome::Transient, "fitted power above 1")
                    } else {
                        (Outcome::Recurrent, "fitted power below 1")
                    }
                } else if fit.gamma > 1.0 + tau {
                    (Outcome::Transient, "ln ln exponent above 1 + tau")
                } else if fit.gamma < 1.0 - tau {
                    (Outcome::Recurrent, "ln ln exponent below 1 - tau")
                } else {
                    (Outcome::Inconclusive, "ln ln exponent within tau of 1")
                };
                (
                    o,
                    format!(
                        "Raabe limit {l:.6} within tau of 1; ln ln refinement alpha={:.4}, gamma={:.4}: {why}",
                        fit.alpha, fit.gamma
                    ),
                    Some(fit),
                )
            }
            fit => (
                Outcome::Inconclusive,
                format!("Raabe limit {l:.6} within tau of 1 and the ln ln refinement is not well resolved"),
                fit,
            ),
        }
    };
    Ok(SeriesRun {
        outcome,
        rationale,
        raabe_tail,
        partial_sum_log,
        raabe_limit: Some(l),
        bertrand,
        terms: n_max + 1,
    })
}

/// Evaluates the series criterion through the decision ladder.
pub fn series_verdict(spec: &SeriesSpec) -> Result<Verdict> {
    spec.validate()?;
    let run = run_series(spec)?;
    let class = spec.tail_class();
    let mut flags = Vec::new();
    if class.reg_satisfied == Regularity::Unknown {
        flags.push("hypothesis unverified: regularity of the tail is unknown".to_string());
    }
    let finite = class.log_moment_finite == MomentClass::Finite;
    let (outcome, rationale) = match (finite, spec.shortcut) {
        (true, Shortcut::PositiveRecurrent) => (
            Outcome::PositiveRecurrent,
            format!("finite logarithmic moment: positive recurrent; series check: {}", run.rationale),
        ),
        (true, Shortcut::Recurrent) => (
            Outcome::Recurrent,
            format!("finite moment: recurrent; series check: {}", run.rationale),
        ),
        _ => (run.outcome, run.rationale.clone()),
    };
    if finite && run.outcome == Outcome::Transient {
        flags.push("series disagrees with the finite-moment shortcut".to_string());
    }
    if let (Some(hw), Some(lambda)) = (spec.lambda_half_width, spec.lambda()) {
        if hw > 0.0 && !(finite && spec.shortcut != Shortcut::None) {
            for l in [lambda - hw, lambda + hw] {
                if l <= 0.0 || !hw.is_finite() {
                    flags.push(format!("lambda interval reaches {l:.6}: not contractive"));
                    continue;
                }
                let alt = run_series(&spec.with_lambda(l))?;
                if !alt.outcome.agrees_with(run.outcome) {
                    flags.push(format!(
                        "verdict changes to {:?} at lambda {l:.6} inside the confidence interval",
                        alt.outcome
                    ));
                }
            }
        }
    }
    Ok(Verdict {
        outcome,
        series_outcome: run.outcome,
        rationale,
        raabe_tail: run.raabe_tail,
        partial_sum_log: run.partial_sum_log,
        raabe_limit: run.raabe_limit,
        bertrand: run.bertrand,
        anchors: vec![AnchorResult {
            y: spec.anchor(),
            outcome: Some(outcome),
            raabe_limit: run.raabe_limit,
            note: None,
        }],
        flags,
        y: spec.anchor(),
        lambda: spec.lambda(),
        lambda_source: spec.lambda_source,
        lambda_half_width: spec.lambda_half_width,
        terms: run.terms,
    })
}

/// `ln a_n` for `n = 0..=n`, for inspection and tests.
pub fn log_partial_products(spec: &SeriesSpec, n: u64) -> Vec<f64> {
    let mut acc = 0.0;
    (0..=n)
        .map(|m| {
            acc += (-spec.miss(m)).ln_1p();
            acc
        })
        .collect()
}

/// Series for `R_n = max(R_{n−1} − 1, W_n)`, whose state 0 is recurrent iff
/// `Σ_n Π_{m≤n} P[W₁ ≤ m] = ∞`.
pub fn kesten_kellerer_verdict(w_law: &InnovationLaw, opts: SeriesOptions) -> Result<Verdict> {
    if w_law.dim() != 1 || !w_law.is_integer_valued() {
        return Err(Error::InvalidLaw("W must be a scalar law on the nonnegative integers".into()));
    }
    series_verdict(&SeriesSpec::linear(w_law.clone(), 0.0, 1.0).with_options(opts))
}

/// General exchange process with bounded steps `T` of positive mean: series
/// `Σ_n Π_{m≤n} P[W₁ ≤ y + m·E[T₁]]`.
pub fn exchange_verdict(t_law: &FiniteLaw, w_law: &InnovationLaw, y: f64, opts: SeriesOptions) -> Result<Verdict> {
    let drift = t_law.mean();
    if !(drift > 0.0) {
        return Err(Error::NonpositiveDrift(drift));
    }
    series_verdict(&SeriesSpec::linear(w_law.clone(), y, drift).with_options(opts))
}

/// `ϱ(p, r)` for mortal frogs; only subcritical values are returned.
pub fn frog_rho(p: f64, r: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config("p", format!("{p} not in (0,1]")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::config("r", format!("{r} not in (0,1)")));
    }
    let rho = frog::frog_rho(p, r);
    if rho >= 1.0 - 1e-12 {
        return Err(Error::CriticalRho(rho));
    }
    Ok(rho)
}

/// Recurrent means finitely many frogs are ever woken.
pub fn frog_verdict(p: f64, r: f64, sleep_law: &InnovationLaw, y: f64, opts: SeriesOptions) -> Result<Verdict> {
    let rho = frog_rho(p, r)?;
    series_verdict(
        &SeriesSpec::log(sleep_law.clone(), y, -rho.ln())
            .with_options(opts)
            .with_shortcut(Shortcut::Recurrent)
            .with_lambda_source(LambdaSource::Analytic, None),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CookieOutcome {
    TransientLeft,
    Recurrent,
    TransientRight,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CookieVerdict {
    pub outcome: CookieOutcome,
    pub mean_log_rho: f64,
    pub rationale: String,
    pub series: Option<Verdict>,
}

/// Cookie-perturbed RWRE with leftward drift `E[ln ρ₀] > 0`.
pub fn cookie_verdict(
    omega: &FiniteLaw,
    cookies: &InnovationLaw,
    y: f64,
    opts: SeriesOptions,
) -> Result<CookieVerdict> {
    let (lo, hi) = omega.support_range();
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::config("omega", "environment must lie in (0,1)"));
    }
    let mean_log_rho = omega.expect(|w| ((1.0 - w) / w).ln());
    if !(mean_log_rho > 0.0) {
        return Err(Error::WrongRegime(mean_log_rho));
    }
    if cookies.tail_class().log_moment_finite == MomentClass::Finite {
        return Ok(CookieVerdict {
            outcome: CookieOutcome::TransientLeft,
            mean_log_rho,
            rationale: "finite logarithmic moment of the cookies: transient to the left".into(),
            series: None,
        });
    }
    let v = series_verdict(
        &SeriesSpec::log(cookies.clone(), y, mean_log_rho)
            .with_options(opts)
            .with_shortcut(Shortcut::None)
            .with_lambda_source(LambdaSource::Analytic, None),
    )?;
    let unknown_moment = cookies.tail_class().log_moment_finite == MomentClass::Unknown;
    let (outcome, rationale) = match v.outcome {
        Outcome::Transient => (CookieOutcome::TransientRight, "series converges: transient to the right"),
        Outcome::Recurrent | Outcome::PositiveRecurrent if unknown_moment => (
            CookieOutcome::Inconclusive,
            "series diverges but the logarithmic moment is unknown: left transience not excluded",
        ),
        Outcome::Recurrent | Outcome::PositiveRecurrent => {
            (CookieOutcome::Recurrent, "infinite logarithmic moment and divergent series: recurrent")
        }
        Outcome::Inconclusive => (CookieOutcome::Inconclusive, "series undecided"),
    };
    Ok(CookieVerdict {
        outcome,
        mean_log_rho,
        rationale: rationale.into(),
        series: Some(v),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SufficientOutcome {
    Transient,
    Recurrent,
    Gap,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientReport {
    pub outcome: SufficientOutcome,
    pub lambda: f64,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub liminf: Option<f64>,
    #[serde(serialize_with = "serde_util::opt_f64_or_inf")]
    pub limsup: Option<f64>,
}

/// Compares the limits of `t·P[ln‖Y₁‖ > t]` with `λ`: above means
/// transient, below recurrent, anything else a gap.
pub fn sufficient_conditions(law: &InnovationLaw, lambda: f64) -> SufficientReport {
    let class = law.tail_class();
    let outcome = match (class.liminf_t_ln_tail, class.limsup_t_ln_tail) {
        (Some(lo), _) if lo > lambda => SufficientOutcome::Transient,
        (_, Some(hi)) if hi < lambda => SufficientOutcome::Recurrent,
        (Some(_), Some(_)) => SufficientOutcome::Gap,
        _ => SufficientOutcome::Unknown,
    };
    SufficientReport {
        outcome,
        lambda,
        liminf: class.liminf_t_ln_tail,
        limsup: class.limsup_t_ln_tail,
    }
}

/// Runs the series at every anchor of `y_grid`. Anchors with no mass below
/// them are skipped; all resolved verdicts must agree.
pub fn anchor_scan(base: &SeriesSpec, y_grid: &[f64]) -> Result<Verdict> {
    if y_grid.is_empty() {
        return Err(Error::config("y_grid", "must not be empty"));
    }
    let mut anchors = Vec::with_capacity(y_grid.len());
    let mut chosen: Option<Verdict> = None;
    let mut resolved: Vec<(f64, Outcome)> = Vec::new();
    for &y in y_grid {
        match series_verdict(&base.with_anchor(y)) {
            Ok(v) => {
                anchors.push(AnchorResult {
                    y,
                    outcome: Some(v.outcome),
                    raabe_limit: v.raabe_limit,
                    note: None,
                });
                if v.outcome.is_resolved() {
                    resolved.push((y, v.outcome));
                }
                let better = match &chosen {
                    None => true,
                    Some(c) => !c.outcome.is_resolved() && v.outcome.is_resolved(),
                };
                if better {
                    chosen = Some(v);
                }
            }
            Err(Error::ZeroAnchor { .. }) => anchors.push(AnchorResult {
                y,
                outcome: None,
                raabe_limit: None,
                note: Some("zero anchor: no mass below y, skipped".into()),
            }),
            Err(e) => return Err(e),
        }
    }
    if let Some(&(y0, o0)) = resolved.first() {
        if let Some(&(y1, o1)) = resolved.iter().find(|(_, o)| !o.agrees_with(o0)) {
            return Err(Error::AnchorDisagreement(format!(
                "y={y0} gives {o0:?} but y={y1} gives {o1:?}"
            )));
        }
    }
    let mut v = chosen.ok_or(Error::ZeroAnchor {
        y: y_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })?;
    v.anchors = anchors;
    Ok(v)
}

/// Where the contraction rate of an ensemble comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaInfo {
    pub lambda: f64,
    pub source: LambdaSource,
    pub half_width: Option<f64>,
}

/// Exact `λ` when available, otherwise a Monte Carlo estimate.
pub fn lambda_for(ensemble: &MatrixEnsemble, lyapunov: LyapunovOptions) -> Result<LambdaInfo> {
    if let Some(lambda) = exact_lambda(ensemble) {
        let source = if ensemble.dim() == 1 {
            LambdaSource::Analytic
        } else {
            LambdaSource::SpectralRadius
        };
        return Ok(LambdaInfo {
            lambda,
            source,
            half_width: None,
        });
    }
    let est = estimate_lyapunov(ensemble, lyapunov)?;
    Ok(LambdaInfo {
        lambda: est.lambda_hat,
        source: LambdaSource::Estimated,
        half_width: Some(est.half_width),
    })
}

/// Verdict for the autoregressive chain driven by `ensemble` and `law`
/// across an anchor grid.
pub fn ar_verdict(
    ensemble: &MatrixEnsemble,
    law: &InnovationLaw,
    y_grid: &[f64],
    opts: SeriesOptions,
    lyapunov: LyapunovOptions,
) -> Result<Verdict> {
    let info = lambda_for(ensemble, lyapunov)?;
    if !(info.lambda > 0.0) {
        return Err(Error::Unsupported(format!(
            "lambda = {} is not positive: the chain is not contractive",
            info.lambda
        )));
    }
    let base = SeriesSpec::log(law.clone(), 1.0, info.lambda)
        .with_options(opts)
        .with_lambda_source(info.source, info.half_width);
    anchor_scan(&base, y_grid)
}
