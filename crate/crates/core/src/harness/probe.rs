//! Monte Carlo recurrence probe: how often does `‖V_n‖` return below `b`?

use rand::Rng;
use serde::Serialize;

use super::config::{ProcessSpec, ScenarioConfig};
use crate::dist::InnovationLaw;
use crate::error::{Error, Result};
use crate::matrix_env::{sample_matrix, MatrixEnsemble};
use crate::processes::branching::{floor_counts, BranchingState, DEFAULT_POPULATION_CAP};
use crate::processes::cookie::{simulate_cookie_walk_with, CookieWalkConfig};
use crate::processes::frog::{simulate_frog, FrogConfig};
use crate::rng;

/// Share of replicas that must stay above every threshold for a
/// transient-looking run.
pub const DIVERGENCE_THRESHOLD: f64 = 0.99;
/// Minimum growth of the mean visit count per unit of `ln n`.
pub const MIN_LOG_SLOPE: f64 = 0.2;
pub const MIN_R2: f64 = 0.5;
/// Share of the fitted slope the final decade must retain.
pub const PERSISTENCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictHint {
    RecurrentLike,
    TransientLike,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub process: ProcessSpec,
    pub ensemble: Option<MatrixEnsemble>,
    pub innovation: InnovationLaw,
    pub b_grid: Vec<f64>,
    pub horizon: u64,
    pub replicas: usize,
    pub seed: u64,
    pub budget: u64,
}

/// `{1, 10, 100}` times the median of the innovation norm (or 1 when the
/// median is 0).
pub fn default_b_grid(law: &InnovationLaw) -> Vec<f64> {
    let med = law.median();
    let scale = if med > 0.0 && med.is_finite() { med } else { 1.0 };
    vec![scale, 10.0 * scale, 100.0 * scale]
}

impl ProbeSpec {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        ProbeSpec {
            process: cfg.process.clone(),
            ensemble: cfg.ensemble.clone(),
            innovation: cfg.innovation.clone(),
            b_grid: cfg
                .probe
                .b_grid
                .clone()
                .unwrap_or_else(|| default_b_grid(&cfg.innovation)),
            horizon: cfg.probe.horizon,
            replicas: cfg.probe.replicas,
            seed: cfg.probe.seed,
            budget: cfg.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdVisits {
    pub b: f64,
    /// `#{n ≤ N : ‖V_n‖ ≤ b}` per replica.
    pub counts: Vec<u64>,
    /// Mean visit count at each checkpoint.
    pub mean_counts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrogSummary {
    pub runs: usize,
    pub truncated: usize,
    pub wake_cap_hits: usize,
    pub mean_woken: f64,
    pub max_woken: u64,
    pub mean_zero_visits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub process: String,
    pub horizon: u64,
    pub replicas: usize,
    pub seed: u64,
    pub b_grid: Vec<f64>,
    pub checkpoints: Vec<u64>,
    pub visits: Vec<ThresholdVisits>,
    /// Share of replicas whose minimum of `‖V_n‖` over `[N/10, N]` exceeds
    /// the largest threshold.
    pub divergence_fraction: f64,
    pub log_slope: Option<f64>,
    pub log_r2: Option<f64>,
    /// Growth of the mean count per unit of `ln n` over the final decade.
    pub final_log_slope: Option<f64>,
    pub verdict_hint: VerdictHint,
    pub drift_sign: Option<i8>,
    pub mean_final_position: Option<f64>,
    pub frog: Option<FrogSummary>,
    pub flags: Vec<String>,
}

impl ProbeReport {
    /// Visit counts are nondecreasing in `b` and along checkpoints.
    pub fn is_monotone(&self) -> bool {
        let in_b = self.visits.windows(2).all(|w| {
            w[0].counts.iter().zip(&w[1].counts).all(|(a, b)| a <= b)
                && w[0].mean_counts.iter().zip(&w[1].mean_counts).all(|(a, b)| a <= b)
        });
        let in_n = self
            .visits
            .iter()
            .all(|v| v.mean_counts.windows(2).all(|w| w[0] <= w[1]));
        in_b && in_n
    }
}

/// Decades below `N`, the last three decades of `N`, and `N` itself.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut c = Vec::new();
    let mut p = 10u64;
    while p < horizon {
        c.push(p);
        p = p.saturating_mul(10);
    }
    for k in [1000, 100, 10] {
        if horizon / k >= 1 {
            c.push(horizon / k);
        }
    }
    c.push(horizon);
    c.sort_unstable();
    c.dedup();
    c
}

struct ReplicaStats {
    /// `counts[b][checkpoint]`.
    counts: Vec<Vec<u64>>,
    late_min: f64,
    final_position: Option<i64>,
    overflowed: bool,
}

struct Recorder<'a> {
    b_grid: &'a [f64],
    checkpoints: &'a [u64],
    late_start: u64,
    running: Vec<u64>,
    counts: Vec<Vec<u64>>,
    next_ck: usize,
    late_min: f64,
}

impl<'a> Recorder<'a> {
    fn new(b_grid: &'a [f64], checkpoints: &'a [u64], horizon: u64) -> Self {
        Recorder {
            b_grid,
            checkpoints,
            late_start: horizon / 10,
            running: vec![0; b_grid.len()],
            counts: vec![Vec::with_capacity(checkpoints.len()); b_grid.len()],
            next_ck: 0,
            late_min: f64::INFINITY,
        }
    }

    fn observe(&mut self, n: u64, norm: f64) {
        for (k, b) in self.b_grid.iter().enumerate() {
            if norm <= *b {
                self.running[k] += 1;
            }
        }
        if n >= self.late_start {
            self.late_min = self.late_min.min(norm);
        }
        while self.next_ck < self.checkpoints.len() && self.checkpoints[self.next_ck] == n {
            for (k, c) in self.running.iter().enumerate() {
                self.counts[k].push(*c);
            }
            self.next_ck += 1;
        }
    }
}

/// `ln(eᵃ + eᵇ)`, exact when either side is `−inf`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn log_norm(lx: &[f64]) -> f64 {
    lx.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Entrywise logarithms of each atom, row-major.
fn log_entries(ens: &MatrixEnsemble) -> Vec<Vec<f64>> {
    ens.atoms().iter().map(|a| a.matrix.entries().iter().map(|v| v.ln()).collect()).collect()
}

fn run_replica<R: Rng + ?Sized>(spec: &ProbeSpec, ck: &[u64], rng: &mut R) -> Result<ReplicaStats> {
    let n_steps = spec.horizon;
    let mut rec = Recorder::new(&spec.b_grid, ck, n_steps);
    let mut final_position = None;
    let mut overflowed = false;
    match &spec.process {
        ProcessSpec::Ar | ProcessSpec::MaxAr => {
            let ens = spec.ensemble.as_ref().expect("validated ensemble");
            let combine = if matches!(spec.process, ProcessSpec::MaxAr) {
                f64::max
            } else {
                log_add_exp
            };
            let log_atoms = log_entries(ens);
            let d = ens.dim();
            let mut lx = spec.innovation.sample_ln_vector(rng);
            let mut next = vec![0.0; d];
            rec.observe(0, log_norm(&lx).exp());
            for n in 1..=n_steps {
                let la = &log_atoms[ens.sample_index(rng)];
                let ly = spec.innovation.sample_ln_vector(rng);
                for (i, slot) in next.iter_mut().enumerate() {
                    let ax = (0..d).fold(f64::NEG_INFINITY, |acc, j| log_add_exp(acc, la[i * d + j] + lx[j]));
                    *slot = combine(ax, ly[i]);
                }
                std::mem::swap(&mut lx, &mut next);
                rec.observe(n, log_norm(&lx).exp());
            }
        }
        ProcessSpec::Branching { offspring } => {
            let ens = spec.ensemble.as_ref().expect("validated ensemble");
            let first = spec.innovation.sample_vector(rng);
            let mut state = match floor_counts(&first, DEFAULT_POPULATION_CAP) {
                Ok(c) => Some(BranchingState::new(c)),
                Err(_) => None,
            };
            let norm = |s: &Option<BranchingState>| match s {
                Some(s) => s.z.iter().copied().max().unwrap_or(0) as f64,
                None => f64::INFINITY,
            };
            rec.observe(0, norm(&state));
            for n in 1..=n_steps {
                let a = sample_matrix(ens, rng);
                let y = spec.innovation.sample_vector(rng);
                if let Some(s) = state.as_mut() {
                    let ok = floor_counts(&y, DEFAULT_POPULATION_CAP)
                        .and_then(|imm| s.advance(*offspring, a, &imm, rng));
                    match ok {
                        Ok(()) => {}
                        Err(Error::PopulationOverflow(_)) => state = None,
                        Err(e) => return Err(e),
                    }
                }
                if state.is_none() {
                    overflowed = true;
                }
                rec.observe(n, norm(&state));
            }
        }
        ProcessSpec::Exchange { t } => {
            let mut r = spec.innovation.sample(rng);
            rec.observe(0, r.abs());
            for n in 1..=n_steps {
                let step = t.sample(rng);
                let w = spec.innovation.sample(rng);
                r = (r - step).max(w);
                rec.observe(n, r.abs());
            }
        }
        ProcessSpec::CookieWalk { omega } => {
            let cfg = CookieWalkConfig {
                omega: omega.clone(),
                cookies: spec.innovation.clone(),
                steps: n_steps,
            };
            let out = simulate_cookie_walk_with(&cfg, rng, |n, pos| rec.observe(n, pos.unsigned_abs() as f64))?;
            final_position = Some(out.final_position);
        }
        ProcessSpec::Frog { .. } => unreachable!("frogs are probed by termination"),
    }
    Ok(ReplicaStats {
        counts: rec.counts,
        late_min: rec.late_min,
        final_position,
        overflowed,
    })
}

/// Ordinary least squares of `y` on `x`: slope and `R²`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 && sxx > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    (slope, r2)
}

fn probe_frog(spec: &ProbeSpec, p: f64, r: f64, caps: (u64, u64, u64)) -> Result<ProbeReport> {
    let cfg = FrogConfig {
        p,
        r,
        sleep_law: spec.innovation.clone(),
        site_cap: caps.0,
        wake_cap: caps.1,
        step_cap: caps.2,
    };
    cfg.validate()?;
    let runs = rng::replicate(spec.seed, spec.replicas, |_, rng| simulate_frog(&cfg, rng));
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let n = runs.len();
    let truncated = runs.iter().filter(|o| o.truncated).count();
    let wake_cap_hits = runs
        .iter()
        .filter(|o| o.truncation.as_deref() == Some("wake_cap"))
        .count();
    let frac = truncated as f64 / n as f64;
    let hint = if frac >= DIVERGENCE_THRESHOLD {
        VerdictHint::TransientLike
    } else if truncated == 0 {
        VerdictHint::RecurrentLike
    } else {
        VerdictHint::Ambiguous
    };
    Ok(ProbeReport {
        process: spec.process.name().into(),
        horizon: spec.horizon,
        replicas: n,
        seed: spec.seed,
        b_grid: Vec::new(),
        checkpoints: Vec::new(),
        visits: Vec::new(),
        divergence_fraction: frac,
        log_slope: None,
        log_r2: None,
        final_log_slope: None,
        verdict_hint: hint,
        drift_sign: None,
        mean_final_position: None,
        frog: Some(FrogSummary {
            runs: n,
            truncated,
            wake_cap_hits,
            mean_woken: runs.iter().map(|o| o.woken_count as f64).sum::<f64>() / n as f64,
            max_woken: runs.iter().map(|o| o.woken_count).max().unwrap_or(0),
            mean_zero_visits: runs.iter().map(|o| o.zero_visit_count as f64).sum::<f64>() / n as f64,
        }),
        flags: Vec::new(),
    })
}

pub fn probe(spec: &ProbeSpec) -> Result<ProbeReport> {
    let (per_run, what) = match spec.process {
        ProcessSpec::Frog { step_cap, .. } => (step_cap, "step_cap"),
        _ => (spec.horizon, "horizon"),
    };
    let work = per_run.saturating_mul(spec.replicas as u64);
    if work > spec.budget {
        return Err(Error::BudgetExceeded(format!(
            "{what} x replicas = {work} exceeds the budget {}",
            spec.budget
        )));
    }
    if let ProcessSpec::Frog {
        p,
        r,
        site_cap,
        wake_cap,
        step_cap,
    } = spec.process
    {
        return probe_frog(spec, p, r, (site_cap, wake_cap, step_cap));
    }
    if spec.b_grid.is_empty() || spec.b_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::config("probe.b_grid", "must be nonempty and sorted ascending"));
    }
    let ck = checkpoints(spec.horizon);
    let stats = rng::replicate(spec.seed, spec.replicas, |_, rng| run_replica(spec, &ck, rng));
    let stats: Vec<ReplicaStats> = stats.into_iter().collect::<Result<_>>()?;
    let reps = stats.len() as f64;

    let visits: Vec<ThresholdVisits> = spec
        .b_grid
        .iter()
        .enumerate()
        .map(|(k, &b)| ThresholdVisits {
            b,
            counts: stats.iter().map(|s| *s.counts[k].last().unwrap()).collect(),
            mean_counts: (0..ck.len())
                .map(|c| stats.iter().map(|s| s.counts[k][c] as f64).sum::<f64>() / reps)
                .collect(),
        })
        .collect();

    let b_max = *spec.b_grid.last().unwrap();
    let divergence_fraction = stats.iter().filter(|s| s.late_min > b_max).count() as f64 / reps;

    let fit_from = spec.horizon / 1000;
    let (xs, ys): (Vec<f64>, Vec<f64>) = ck
        .iter()
        .zip(&visits.last().unwrap().mean_counts)
        .filter(|(n, _)| **n >= fit_from.max(1))
        .map(|(n, c)| ((*n as f64).ln(), *c))
        .unzip();
    let (slope, r2) = if xs.len() >= 2 { linear_fit(&xs, &ys) } else { (0.0, 0.0) };
    // Saturating counts rise early and then stall; the rise must persist
    // into the final decade.
    let final_slope = match (xs.len(), xs.last(), ys.last()) {
        (n, Some(x1), Some(y1)) if n >= 2 => (y1 - ys[n - 2]) / (x1 - xs[n - 2]),
        _ => 0.0,
    };
    let persistent = final_slope > MIN_LOG_SLOPE && final_slope >= PERSISTENCE * slope;

    let verdict_hint = if divergence_fraction >= DIVERGENCE_THRESHOLD {
        VerdictHint::TransientLike
    } else if slope > MIN_LOG_SLOPE && r2 > MIN_R2 && persistent {
        VerdictHint::RecurrentLike
    } else {
        VerdictHint::Ambiguous
    };

    let mut flags = Vec::new();
    let overflowed = stats.iter().filter(|s| s.overflowed).count();
    if overflowed > 0 {
        flags.push(format!(
            "population cap reached in {overflowed} replicas; their norms count as infinite afterwards"
        ));
    }
    let (drift_sign, mean_final_position) = if matches!(spec.process, ProcessSpec::CookieWalk { .. }) {
        let mut finals: Vec<i64> = stats.iter().filter_map(|s| s.final_position).collect();
        let mean = finals.iter().map(|&v| v as f64).sum::<f64>() / reps;
        finals.sort_unstable();
        let median = finals[finals.len() / 2];
        (Some(median.signum() as i8), Some(mean))
    } else {
        (None, None)
    };

    Ok(ProbeReport {
        process: spec.process.name().into(),
        horizon: spec.horizon,
        replicas: spec.replicas,
        seed: spec.seed,
        b_grid: spec.b_grid.clone(),
        checkpoints: ck,
        visits,
        divergence_fraction,
        log_slope: Some(slope),
        log_r2: Some(r2),
        final_log_slope: Some(final_slope),
        verdict_hint,
        drift_sign,
        mean_final_position,
        frog: None,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn ar_spec(a: f64, law: InnovationLaw, horizon: u64, replicas: usize) -> ProbeSpec {
        ProbeSpec {
            process: ProcessSpec::Ar,
            ensemble: Some(MatrixEnsemble::constant(Matrix::scalar(a)).unwrap()),
            b_grid: default_b_grid(&law),
            innovation: law,
            horizon,
            replicas,
            seed: 1,
            budget: u64::MAX,
        }
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(100_000), vec![10, 100, 1000, 10_000, 100_000]);
        assert_eq!(checkpoints(5000), vec![5, 10, 50, 100, 500, 1000, 5000]);
    }

    #[test]
    fn geometric_innovation_is_recurrent_like() {
        let mut spec = ar_spec(0.5, InnovationLaw::geometric(0.5), 10_000, 200);
        spec.b_grid = vec![10.0];
        let rep = probe(&spec).unwrap();
        assert_eq!(rep.verdict_hint, VerdictHint::RecurrentLike);
        assert!(rep.is_monotone());
        // Oracle: occupation frequency of [0, 10] on one long run.
        let mut r = rng::stream(99);
        let ens = spec.ensemble.clone().unwrap();
        let mut x = 0.0f64;
        let mut hits = 0u64;
        let n = 1_000_000u64;
        for _ in 0..n {
            x = sample_matrix(&ens, &mut r)[(0, 0)] * x + spec.innovation.sample(&mut r);
            if x <= 10.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let mean = rep.visits[0].mean_counts.last().unwrap() / 10_001.0;
        assert!((mean - freq).abs() < 0.01, "{mean} vs {freq}");
    }

    #[test]
    fn super_heavy_innovation_is_transient_like() {
        let rep = probe(&ar_spec(0.5, InnovationLaw::log_pareto(1.0, 0.5), 10_000, 100)).unwrap();
        assert_eq!(rep.verdict_hint, VerdictHint::TransientLike);
    }

    #[test]
    fn zero_innovation_is_recurrent_like() {
        let rep = probe(&ar_spec(0.5, InnovationLaw::deterministic(0.0), 10_000, 4)).unwrap();
        assert_eq!(rep.b_grid, vec![1.0, 10.0, 100.0]);
        assert_eq!(rep.verdict_hint, VerdictHint::RecurrentLike);
    }

    #[test]
    fn budget_enforced() {
        let mut spec = ar_spec(0.5, InnovationLaw::geometric(0.5), 10_000, 100);
        spec.budget = 1000;
        assert!(matches!(probe(&spec), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let spec = ar_spec(0.5, InnovationLaw::log_pareto(1.0, 1.0), 2000, 16);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| probe(&spec).unwrap());
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| probe(&spec).unwrap());
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    }
}
