//! Built-in invariant battery.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::Rng;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::run::{evaluate, to_json};
use crate::classify::{
    anchor_scan, frog_rho, log_partial_products, series_verdict, sufficient_conditions, SeriesOptions, SeriesSpec,
    Shortcut, SufficientOutcome,
};
use crate::dist::{ks_statistic, FiniteLaw, InnovationLaw, MomentClass};
use crate::linalg::{vec_le, Matrix};
use crate::matrix_env::{
    check_pr, estimate_lyapunov, variation_violations, Atom, LyapunovOptions, MatrixEnsemble,
};
use crate::processes::ar::{run_ar, ArState, Environment};
use crate::processes::branching::{founder_survival, run_branching};
use crate::processes::frog::{simulate_frog, FrogConfig};
use crate::processes::{simulate_exchange, OffspringFamily};
use crate::rng;

pub type Check = std::result::Result<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
    Matrix::from_rows(&[vec![a, b], vec![c, d]]).expect("2x2")
}

/// Two-atom positive 2×2 ensemble shared by several suites.
pub fn two_atom_ensemble() -> MatrixEnsemble {
    MatrixEnsemble::finite(vec![
        Atom::new(m2(0.5, 0.3, 0.2, 0.4), 0.5),
        Atom::new(m2(0.6, 0.2, 0.3, 0.5), 0.5),
    ])
    .expect("valid ensemble")
}

/// Scalar ensemble `{0.25, 0.5}` with equal weights; `λ = 1.5 ln 2`.
pub fn scalar_two_atom() -> MatrixEnsemble {
    MatrixEnsemble::finite(vec![
        Atom::new(Matrix::scalar(0.25), 0.5),
        Atom::new(Matrix::scalar(0.5), 0.5),
    ])
    .expect("valid ensemble")
}

fn random_matrix<R: Rng + ?Sized>(d: usize, lo: f64, rng: &mut R) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| lo + rng.random::<f64>()).collect())
        .collect();
    Matrix::from_rows(&rows).expect("square")
}

fn random_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>() * 10.0).collect()
}

fn variation_random_pairs() -> Check {
    let mut r = rng::stream(31);
    let pairs = 10_000;
    for k in 0..pairs {
        let d = 2 + k % 3;
        let a = random_matrix(d, 1e-3, &mut r);
        let b = random_matrix(d, 1e-3, &mut r);
        let x = random_vec(d, &mut r);
        let v = variation_violations(&a, &b, &x);
        ensure(v.is_empty(), || format!("pair {k}: {v:?}"))?;
    }
    Ok(format!("{pairs} random positive pairs, no violations"))
}

fn variation_ensemble_products() -> Check {
    let ens = two_atom_ensemble();
    let atoms: Vec<Matrix> = ens.support().cloned().collect();
    let max_len = 8;
    let mut layer = vec![Matrix::identity(2)];
    let mut checked = 0;
    let mut r = rng::stream(32);
    for _ in 0..max_len {
        let next: Vec<Matrix> = layer.iter().flat_map(|g| atoms.iter().map(move |a| a.mul(g))).collect();
        for g in &next {
            for h in &atoms {
                let x = random_vec(2, &mut r);
                let v = variation_violations(g, h, &x);
                ensure(v.is_empty(), || format!("product violates {v:?}"))?;
                checked += 1;
            }
        }
        layer = next;
    }
    let kappa = check_pr(&ens, 1).map_err(|e| e.to_string())?.ok_or("no positive product")?;
    for a in &atoms {
        ensure(kappa <= a.norm_inf(), || format!("kappa {kappa} exceeds |A| {}", a.norm_inf()))?;
    }
    Ok(format!("{checked} product pairs up to length {max_len}; kappa = {kappa}"))
}

fn coupling_chain() -> Check {
    let scenarios = 1000;
    let steps = 1000;
    let bad: Vec<usize> = rng::replicate(33, scenarios, |k, r| {
        let d = 1 + k % 3;
        let ens = MatrixEnsemble::finite(vec![
            Atom::new(random_matrix(d, 0.0, r).scale(1.0 / d as f64), 0.5),
            Atom::new(random_matrix(d, 0.0, r).scale(0.8 / d as f64), 0.5),
        ])
        .expect("valid ensemble");
        let law = InnovationLaw::scaled_vector(InnovationLaw::log_pareto(1.0, 1.5), d);
        let env = Environment::draw(&ens, &law, steps, r).expect("draw");
        let mut s = ArState::new(env.innovations[0].clone()).expect("state");
        let mut violations = 0;
        for (a, y) in env.matrices.iter().zip(&env.innovations[1..]) {
            s.advance(a, y).expect("advance");
            if !s.coupling_holds() {
                violations += 1;
            }
        }
        violations
    });
    let total: usize = bad.iter().sum();
    ensure(total == 0, || format!("{total} coupling violations"))?;
    Ok(format!("{scenarios} scenarios x {steps} steps, no violations"))
}

fn closed_form() -> Check {
    let mut r = rng::stream(34);
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let ens = MatrixEnsemble::finite(vec![
            Atom::new(random_matrix(d, 0.0, &mut r).scale(0.7 / d as f64), 0.5),
            Atom::new(random_matrix(d, 0.0, &mut r).scale(0.9 / d as f64), 0.5),
        ])
        .expect("valid ensemble");
        let law = InnovationLaw::scaled_vector(InnovationLaw::geometric(0.3), d);
        let n = 30;
        let env = Environment::draw(&ens, &law, n, &mut r).map_err(|e| e.to_string())?;
        let rec = run_ar(&env).map_err(|e| e.to_string())?;
        let mut sum = vec![0.0; d];
        let mut mx = vec![0.0f64; d];
        for m in 0..=n {
            let mut v = env.innovations[m].clone();
            for a in &env.matrices[m..] {
                v = a.mul_vec(&v);
            }
            for i in 0..d {
                sum[i] += v[i];
                mx[i] = mx[i].max(v[i]);
            }
        }
        let row = &rec.values[n];
        for i in 0..d {
            let x = row[i];
            let nv = row[2 * d + i];
            ensure((x - sum[i]).abs() <= 1e-9 * sum[i].max(1.0), || format!("X mismatch {x} vs {}", sum[i]))?;
            ensure((nv - mx[i]).abs() <= 1e-9 * mx[i].max(1.0), || format!("N mismatch {nv} vs {}", mx[i]))?;
        }
    }
    Ok("recursion matches the closed-form sum and maximum on 50 environments".into())
}

fn kesten_identity() -> Check {
    let w = InnovationLaw::table(vec![0.0, 1.0, 2.0], vec![0.5, 0.3, 0.2]).map_err(|e| e.to_string())?;
    let t = FiniteLaw::constant(1.0);
    let reps = 100_000;
    let hits = rng::replicate(35, reps, |_, r| simulate_exchange(&t, &w, 0.0, 3, r).values[3][0] == 0.0)
        .into_iter()
        .filter(|h| *h)
        .count();
    let est = hits as f64 / reps as f64;
    let se = (0.4f64 * 0.6 / reps as f64).sqrt();
    ensure((est - 0.4).abs() < 3.0 * se, || format!("P[R_3 = 0] = {est}, expected 0.4 +- {}", 3.0 * se))?;
    Ok(format!("P[R_3 = 0] = {est:.5} (0.4 +- {:.5})", 3.0 * se))
}

/// Cross-replica mean of `Z_n` against `X_n` on one environment.
pub fn branching_mean_check(reps: usize, horizon: usize) -> Check {
    let ens = two_atom_ensemble();
    let law = InnovationLaw::scaled_vector(InnovationLaw::poisson(2.0), 2);
    let env = Environment::draw(&ens, &law, horizon, &mut rng::stream(36)).map_err(|e| e.to_string())?;
    let x = run_ar(&env).map_err(|e| e.to_string())?;
    let runs = rng::replicate(37, reps, |_, r| run_branching(&env, OffspringFamily::Poisson, r));
    let runs: Vec<Vec<Vec<u64>>> = runs.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 0..=horizon {
        for i in 0..2 {
            let vals: Vec<f64> = runs.iter().map(|z| z[n][i] as f64).collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let target = x.values[n][i];
            let z = if se > 0.0 { (mean - target).abs() / se } else if mean == target { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            ensure(z < 5.0, || format!("n={n} i={i}: mean {mean} vs {target} ({z:.2} se)"))?;
        }
    }
    Ok(format!("{reps} replicas, n <= {horizon}, worst deviation {worst:.2} se"))
}

fn branching_mean() -> Check {
    branching_mean_check(10_000, 20)
}

/// Survival of a founder against `d‖A_n⋯A_1‖`, plus the single-line case.
pub fn extinction_check(reps: usize, horizon: usize) -> Check {
    let ens = two_atom_ensemble();
    let law = InnovationLaw::scaled_vector(InnovationLaw::poisson(2.0), 2);
    let env = Environment::draw(&ens, &law, horizon, &mut rng::stream(38)).map_err(|e| e.to_string())?;
    let norms = env.product_norms();
    for founder in 0..2 {
        let runs = rng::replicate(39 + founder as u64, reps, |_, r| {
            founder_survival(&env.matrices, OffspringFamily::Poisson, founder, r)
        });
        let runs: Vec<Vec<bool>> = runs.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        for n in 0..=horizon {
            let p = runs.iter().filter(|s| s[n]).count() as f64 / reps as f64;
            let sigma = (p * (1.0 - p) / reps as f64).sqrt();
            let bound = 2.0 * norms[n];
            ensure(p <= bound + 3.0 * sigma, || format!("founder {founder} n={n}: {p} > {bound}"))?;
        }
    }
    let half = vec![Matrix::scalar(0.5); 5];
    let lineage = rng::replicate(41, reps * 4, |_, r| founder_survival(&half, OffspringFamily::Bernoulli, 0, r));
    let alive = lineage
        .into_iter()
        .filter(|s| s.as_ref().map(|v| v[5]).unwrap_or(false))
        .count();
    let est = alive as f64 / (reps * 4) as f64;
    let p = 0.5f64.powi(5);
    let sd = (p * (1.0 - p) / (reps * 4) as f64).sqrt();
    ensure((est - p).abs() < 3.0 * sd, || format!("lineage survival {est} vs {p}"))?;
    Ok(format!("bound holds for n <= {horizon}; lineage survival {est:.5} vs {p:.5}"))
}

fn extinction_bound() -> Check {
    extinction_check(10_000, 30)
}

fn lyapunov_constant() -> Check {
    let ens = MatrixEnsemble::constant(m2(0.3, 0.1, 0.2, 0.4)).map_err(|e| e.to_string())?;
    let est = estimate_lyapunov(&ens, LyapunovOptions::new(200, 2, 0)).map_err(|e| e.to_string())?;
    let err = (est.lambda_hat - 2f64.ln()).abs();
    ensure(err < 1e-9, || format!("|lambda - ln 2| = {err}"))?;
    Ok(format!("|lambda - ln 2| = {err:.2e}"))
}

/// Share of repeated estimations whose 99% interval covers `1.5 ln 2`.
pub fn lyapunov_coverage(runs: usize) -> f64 {
    let ens = scalar_two_atom();
    let truth = 1.5 * 2f64.ln();
    let covered = (0..runs)
        .filter(|&k| {
            estimate_lyapunov(&ens, LyapunovOptions::new(2000, 32, 1000 + k as u64))
                .map(|e| e.contains(truth))
                .unwrap_or(false)
        })
        .count();
    covered as f64 / runs as f64
}

fn lyapunov_ci() -> Check {
    let cov = lyapunov_coverage(100);
    ensure(cov >= 0.95, || format!("coverage {cov}"))?;
    Ok(format!("coverage {:.0}/100", cov * 100.0))
}

/// Every built-in family, as used by the KS and floor suites.
pub fn builtin_laws() -> Vec<(&'static str, InnovationLaw)> {
    vec![
        ("log_pareto(1, 2)", InnovationLaw::log_pareto(1.0, 2.0)),
        ("log_pareto(1, 0.5)", InnovationLaw::log_pareto(1.0, 0.5)),
        ("pareto_tail(1.5)", InnovationLaw::pareto_tail(1.5)),
        ("geometric(0.3)", InnovationLaw::geometric(0.3)),
        ("poisson(3)", InnovationLaw::poisson(3.0)),
        (
            "table",
            InnovationLaw::table(vec![0.0, 1.0, 2.0], vec![0.5, 0.3, 0.2]).expect("valid table"),
        ),
        ("deterministic(2)", InnovationLaw::deterministic(2.0)),
        ("scaled_vector(geometric(0.5), 3)", InnovationLaw::scaled_vector(InnovationLaw::geometric(0.5), 3)),
        ("floor(log_pareto(0.5, 1))", InnovationLaw::log_pareto(0.5, 1.0).floored()),
    ]
}

fn ks_band() -> Check {
    let n = 100_000;
    let band = 1.95 / (n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (k, (name, law)) in builtin_laws().into_iter().enumerate() {
        let mut r = rng::stream(50 + k as u64);
        let xs: Vec<f64> = (0..n).map(|_| crate::linalg::vec_norm(&law.sample_vector(&mut r))).collect();
        let d = ks_statistic(&xs, &law);
        worst = worst.max(d);
        ensure(d < band, || format!("{name}: KS {d} >= {band}"))?;
    }
    Ok(format!("worst KS {worst:.5} < {band:.5}"))
}

fn floor_compatibility() -> Check {
    let mut checked = 0;
    for (name, law) in builtin_laws() {
        if law.dim() != 1 {
            continue;
        }
        let fl = law.clone().floored();
        for k in 0..400 {
            let x = k as f64 * 0.137;
            let (l, f) = (fl.cdf(x), law.cdf(x + 1.0));
            ensure(l <= f + 1e-12, || format!("{name}: L({x}) = {l} > F(x+1) = {f}"))?;
            checked += 1;
        }
    }
    Ok(format!("L(x) <= F(x+1) at {checked} grid points"))
}

fn quick() -> SeriesOptions {
    SeriesOptions {
        n_max: 100_000,
        ..SeriesOptions::default()
    }
}

fn anchor_invariance() -> Check {
    let cases = [
        (InnovationLaw::log_pareto(1.0, 2.0), 2f64.ln()),
        (InnovationLaw::log_pareto(1.0, 1.0), 2.0),
        (InnovationLaw::log_pareto(1.0, 0.5), 2f64.ln()),
        (InnovationLaw::log_pareto(2.0, 1.0), 0.25),
    ];
    for (law, lambda) in cases {
        let base = SeriesSpec::log(law.clone(), 1.0, lambda).with_options(quick());
        let v = anchor_scan(&base, &[0.5, 1.0, 10.0, 100.0]).map_err(|e| format!("{law:?}: {e}"))?;
        let outs: Vec<_> = v.anchors.iter().filter_map(|a| a.outcome).collect();
        ensure(outs.windows(2).all(|w| w[0].agrees_with(w[1])), || format!("{law:?}: {outs:?}"))?;
    }
    Ok("verdicts agree across y in {0.5, 1, 10, 100}".into())
}

fn sufficient_consistency() -> Check {
    let mut definite = 0;
    for beta in [0.5, 1.0, 2.0, 4.0] {
        for lambda in [0.1, 0.3, 0.7, 1.5, 3.0] {
            let law = InnovationLaw::log_pareto(beta, 1.0);
            let s = sufficient_conditions(&law, lambda);
            let v = series_verdict(&SeriesSpec::log(law, 1.0, lambda).with_options(quick())).map_err(|e| e.to_string())?;
            match s.outcome {
                SufficientOutcome::Transient => {
                    definite += 1;
                    ensure(v.series_outcome == crate::classify::Outcome::Transient, || {
                        format!("beta={beta} lambda={lambda}: sufficient Transient, series {:?}", v.series_outcome)
                    })?
                }
                SufficientOutcome::Recurrent => {
                    definite += 1;
                    ensure(v.series_outcome.is_recurrent(), || {
                        format!("beta={beta} lambda={lambda}: sufficient Recurrent, series {:?}", v.series_outcome)
                    })?
                }
                _ => {}
            }
        }
    }
    ensure(definite > 0, || "no definite sufficient condition on the grid".into())?;
    Ok(format!("{definite} definite cases consistent with the series"))
}

fn remark_rm() -> Check {
    let lambda = 2f64.ln();
    for (name, law) in builtin_laws() {
        if law.dim() != 1 || law.tail_class().log_moment_finite != MomentClass::Finite {
            continue;
        }
        let spec = SeriesSpec::log(law.clone(), 10.0, lambda)
            .with_options(quick())
            .with_shortcut(Shortcut::None);
        let v = series_verdict(&spec).map_err(|e| format!("{name}: {e}"))?;
        ensure(v.series_outcome != crate::classify::Outcome::Transient, || {
            format!("{name}: finite log moment but series Transient")
        })?;
    }
    for law in [InnovationLaw::geometric(0.5), InnovationLaw::log_pareto(1.0, 2.0)] {
        let spec = SeriesSpec::log(law.clone(), 10.0, lambda);
        let lp = log_partial_products(&spec, 100_000);
        let first = lp[0];
        let at_1e4 = lp[9_999];
        let last = *lp.last().expect("nonempty");
        ensure(at_1e4 >= first - 2f64.ln(), || format!("{law:?}: a_N = {} < a_1 / 2", at_1e4.exp()))?;
        ensure(last >= at_1e4 + 0.99f64.ln(), || format!("{law:?}: partial products still falling"))?;
    }
    Ok("finite log moment never yields Transient; partial products bounded below".into())
}

fn partial_product_monotonicity() -> Check {
    let specs = [
        SeriesSpec::log(InnovationLaw::log_pareto(1.0, 1.0), 1.0, 2.0),
        SeriesSpec::log(InnovationLaw::log_pareto(1.0, 0.5), 10.0, 0.3),
        SeriesSpec::log(InnovationLaw::geometric(0.2), 1.0, 0.1),
        SeriesSpec::linear(InnovationLaw::pareto_tail(2.0).floored(), 2.0, 1.0),
    ];
    for spec in &specs {
        let lp = log_partial_products(spec, 20_000);
        ensure(lp.windows(2).all(|w| w[1] <= w[0]), || format!("{spec:?}: increasing partial product"))?;
    }
    Ok(format!("{} specs nonincreasing over 20000 terms", specs.len()))
}

fn lambda_monotonicity() -> Check {
    let lambdas = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
    for beta in [0.5, 1.0, 2.0] {
        for p in [0.5, 1.0, 2.0] {
            let mut seen_recurrent = false;
            for &lambda in &lambdas {
                let law = InnovationLaw::log_pareto(beta, p);
                let v = series_verdict(&SeriesSpec::log(law, 1.0, lambda).with_options(quick()))
                    .map_err(|e| e.to_string())?;
                if seen_recurrent {
                    ensure(v.series_outcome != crate::classify::Outcome::Transient, || {
                        format!("beta={beta} p={p}: Transient at lambda={lambda} after a recurrent verdict")
                    })?;
                }
                seen_recurrent |= v.series_outcome.is_recurrent();
            }
        }
    }
    Ok("no recurrent-to-transient flip as lambda grows".into())
}

const DETERMINISM_SCENARIO: &str = r#"{
    "process": {"kind": "ar"},
    "ensemble": {"dim": 2, "atoms": [
        {"matrix": [[0.5, 0.3], [0.2, 0.4]], "p": 0.5},
        {"matrix": [[0.6, 0.2], [0.3, 0.5]], "p": 0.5}]},
    "innovation": {"kind": "scaled_vector", "component": {"kind": "log_pareto", "beta": 1.0, "p": 2.0}, "dim": 2},
    "classifier": {"n_max": 10000},
    "probe": {"horizon": 2000, "replicas": 16, "seed": 5},
    "lyapunov": {"steps": 2000, "replicas": 8, "seed": 1}
}"#;

fn determinism() -> Check {
    let cfg = ScenarioConfig::from_json(DETERMINISM_SCENARIO).map_err(|e| e.to_string())?;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(|| evaluate(&cfg).map(|r| to_json(&r)))
    };
    let a = run(1).map_err(|e| e.to_string())?;
    let b = run(1).map_err(|e| e.to_string())?;
    let c = run(4).map_err(|e| e.to_string())?;
    ensure(a == b, || "two identical runs differ".into())?;
    ensure(a == c, || "1 and 4 worker threads differ".into())?;
    Ok(format!("{} byte report identical across runs and thread counts", a.len()))
}

fn frog_quadratic() -> Check {
    let r1 = frog_rho(1.0, 0.25).map_err(|e| e.to_string())?;
    ensure((r1 - 1.0 / 3.0).abs() < 1e-12, || format!("rho(1, 0.25) = {r1}"))?;
    let r2 = frog_rho(0.9, 0.5).map_err(|e| e.to_string())?;
    let root = (1.0 - (1.0f64 - 4.0 * 0.45 * 0.45).sqrt()) / (2.0 * 0.45);
    ensure((r2 - root).abs() < 1e-12, || format!("rho(0.9, 0.5) = {r2} vs {root}"))?;
    let cfg = FrogConfig::new(1.0, 0.25, InnovationLaw::deterministic(1.0));
    let runs = rng::replicate(60, 1000, |_, r| simulate_frog(&cfg, r));
    let truncated = runs.iter().filter(|o| o.as_ref().map(|o| o.truncated).unwrap_or(true)).count();
    ensure(truncated == 0, || format!("{truncated}/1000 bounded-sleep runs truncated"))?;
    Ok(format!("rho(1, 0.25) = {r1:.12}, rho(0.9, 0.5) = {r2:.12}; 1000/1000 bounded runs terminate"))
}

fn vec_order() -> Check {
    ensure(vec_le(&[1.0, 2.0], &[1.0, 3.0]) && !vec_le(&[2.0], &[1.0]), || "vector order broken".into())?;
    Ok("componentwise order".into())
}

/// Named suites in execution order.
pub fn suites() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("variation_random_pairs", variation_random_pairs as fn() -> Check),
        ("variation_ensemble_products", variation_ensemble_products),
        ("coupling_chain", coupling_chain),
        ("closed_form", closed_form),
        ("kesten_identity", kesten_identity),
        ("branching_mean", branching_mean),
        ("extinction_bound", extinction_bound),
        ("lyapunov_constant", lyapunov_constant),
        ("lyapunov_ci_coverage", lyapunov_ci),
        ("ks_band", ks_band),
        ("floor_compatibility", floor_compatibility),
        ("anchor_invariance", anchor_invariance),
        ("sufficient_consistency", sufficient_consistency),
        ("remark_rm", remark_rm),
        ("partial_product_monotonicity", partial_product_monotonicity),
        ("lambda_monotonicity", lambda_monotonicity),
        ("determinism", determinism),
        ("frog_quadratic", frog_quadratic),
        ("vector_order", vec_order),
    ]
}

pub fn run_suite(name: &'static str, f: fn() -> Check) -> SuiteResult {
    let (passed, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    SuiteResult { name, passed, detail }
}

/// Runs every suite, calling `progress` after each.
pub fn selftest_with(mut progress: impl FnMut(&SuiteResult)) -> SelftestReport {
    let mut out = Vec::new();
    for (name, f) in suites() {
        let r = run_suite(name, f);
        progress(&r);
        out.push(r);
    }
    let passed = out.iter().all(|r| r.passed);
    SelftestReport { suites: out, passed }
}

pub fn selftest() -> SelftestReport {
    selftest_with(|_| {})
}
