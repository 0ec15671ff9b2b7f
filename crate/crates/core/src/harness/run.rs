//! Scenario orchestration and run directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::agreement::{agreement, Agreement, AgreementStatus, ClassifierOutcome};
use super::config::{ProcessSpec, ScenarioConfig};
use super::probe::{probe, ProbeReport, ProbeSpec};
use crate::classify::{
    anchor_scan, ar_verdict, cookie_verdict, frog_rho, sufficient_conditions, CookieVerdict, LambdaSource, SeriesSpec,
    Shortcut, SufficientReport, Verdict,
};
use crate::error::{Error, Result};
use crate::matrix_env::{check_pr, MatrixEnsemble};
use crate::processes::ar::Environment;
use crate::processes::branching::{floor_counts, BranchingState, DEFAULT_POPULATION_CAP};
use crate::processes::cookie::{simulate_cookie_walk_with, CookieWalkConfig};
use crate::processes::frog::{simulate_frog, FrogConfig, FrogOutcome};
use crate::processes::ar::run_ar;
use crate::processes::{simulate_exchange, TrajectoryRecord};
use crate::rng;

/// Longest path written to a run directory.
pub const MAX_TRAJECTORY_STEPS: u64 = 100_000;
/// Longest product checked for joint primitivity.
const PR_SEARCH_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub outcome: Option<ClassifierOutcome>,
    pub verdict: Option<Verdict>,
    pub cookie: Option<CookieVerdict>,
    pub sufficient: Option<SufficientReport>,
    /// Raised instead of a verdict, e.g. a critical frog parameter.
    pub error: Option<String>,
    pub flags: Vec<String>,
}

impl ClassifierReport {
    fn failed(e: Error) -> Self {
        ClassifierReport {
            outcome: None,
            verdict: None,
            cookie: None,
            sufficient: None,
            error: Some(e.to_string()),
            flags: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub process: String,
    pub classifier: ClassifierReport,
    pub probe: ProbeReport,
    pub agreement: Agreement,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.agreement.status != AgreementStatus::Fail
    }
}

/// Errors that abort a run rather than being recorded as a missing verdict.
fn is_fatal(e: &Error) -> bool {
    matches!(e, Error::Config { .. } | Error::BudgetExceeded(_) | Error::Io(_))
}

fn primitivity_flags(ens: &MatrixEnsemble) -> Vec<String> {
    if ens.dim() == 1 || ens.as_constant().is_some() {
        return Vec::new();
    }
    for k in 1..=PR_SEARCH_DEPTH {
        match check_pr(ens, k) {
            Ok(Some(_)) => return Vec::new(),
            Ok(None) => {}
            Err(_) => break,
        }
    }
    vec![format!("no strictly positive product of length <= {PR_SEARCH_DEPTH} found; joint primitivity unverified")]
}

fn series_report(v: Verdict, sufficient: Option<SufficientReport>, mut flags: Vec<String>) -> ClassifierReport {
    flags.extend(v.flags.iter().cloned());
    ClassifierReport {
        outcome: Some(ClassifierOutcome::Series(v.outcome)),
        verdict: Some(v),
        cookie: None,
        sufficient,
        error: None,
        flags,
    }
}

fn classify_inner(cfg: &ScenarioConfig) -> Result<ClassifierReport> {
    let opts = cfg.classifier.options();
    let y_grid = &cfg.classifier.y_grid;
    match &cfg.process {
        ProcessSpec::Ar | ProcessSpec::MaxAr | ProcessSpec::Branching { .. } => {
            let ens = cfg.ensemble.as_ref().expect("validated ensemble");
            let flags = primitivity_flags(ens);
            let v = ar_verdict(ens, &cfg.innovation, y_grid, opts, cfg.lyapunov.options())?;
            let suff = v.lambda.map(|l| sufficient_conditions(&cfg.innovation, l));
            Ok(series_report(v, suff, flags))
        }
        ProcessSpec::Exchange { t } => {
            let mean = t.mean();
            if !(mean > 0.0) {
                return Err(Error::NonpositiveDrift(mean));
            }
            let v = anchor_scan(
                &SeriesSpec::linear(cfg.innovation.clone(), 0.0, mean).with_options(opts),
                y_grid,
            )?;
            Ok(series_report(v, None, Vec::new()))
        }
        ProcessSpec::Frog { p, r, .. } => {
            let rho = frog_rho(*p, *r)?;
            let v = anchor_scan(
                &SeriesSpec::log(cfg.innovation.clone(), 1.0, -rho.ln())
                    .with_options(opts)
                    .with_shortcut(Shortcut::Recurrent)
                    .with_lambda_source(LambdaSource::Analytic, None),
                y_grid,
            )?;
            Ok(series_report(v, None, Vec::new()))
        }
        ProcessSpec::CookieWalk { omega } => {
            let c = cookie_verdict(omega, &cfg.innovation, y_grid[0], opts)?;
            let flags = c.series.as_ref().map(|s| s.flags.clone()).unwrap_or_default();
            Ok(ClassifierReport {
                outcome: Some(ClassifierOutcome::Cookie(c.outcome)),
                verdict: None,
                cookie: Some(c),
                sufficient: None,
                error: None,
                flags,
            })
        }
    }
}

/// Analytic verdict for a scenario. Mathematical refusals (critical frogs,
/// nonpositive drift, disagreeing anchors) are recorded in the report.
pub fn classify_scenario(cfg: &ScenarioConfig) -> Result<ClassifierReport> {
    match classify_inner(cfg) {
        Ok(r) => Ok(r),
        Err(e) if is_fatal(&e) => Err(e),
        Err(e) => Ok(ClassifierReport::failed(e)),
    }
}

/// Classifier, probe and their agreement.
pub fn evaluate(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let classifier = classify_scenario(cfg)?;
    let probe = probe(&ProbeSpec::from_config(cfg))?;
    let agreement = agreement(classifier.outcome, &probe);
    Ok(ScenarioReport {
        process: cfg.process.name().into(),
        classifier,
        probe,
        agreement,
    })
}

/// A single seeded sample of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Sample {
    Trajectory(TrajectoryRecord),
    Frog(FrogOutcome),
}

fn branching_trajectory(
    ens: &MatrixEnsemble,
    cfg: &ScenarioConfig,
    family: crate::processes::OffspringFamily,
    steps: usize,
    rng: &mut rng::Stream,
) -> Result<TrajectoryRecord> {
    let env = Environment::draw(ens, &cfg.innovation, steps, rng)?;
    let ar = run_ar(&env)?;
    let d = ens.dim();
    let mut cols: Vec<String> = (1..=d).map(|i| format!("z{i}")).collect();
    cols.extend((1..=d).map(|i| format!("x{i}")));
    let mut rec = TrajectoryRecord::new(cols);
    let mut state = BranchingState::new(floor_counts(&env.innovations[0], DEFAULT_POPULATION_CAP)?);
    let push = |rec: &mut TrajectoryRecord, n: usize, state: &BranchingState| {
        let z: Vec<f64> = state.z.iter().map(|&v| v as f64).collect();
        let norm = z.iter().copied().fold(0.0, f64::max);
        let row = z.into_iter().chain(ar.values[n][..d].iter().copied()).collect();
        rec.push(n as u64, row, norm);
    };
    push(&mut rec, 0, &state);
    for (n, (a, y)) in env.matrices.iter().zip(&env.innovations[1..]).enumerate() {
        state.advance(family, a, &floor_counts(y, DEFAULT_POPULATION_CAP)?, rng)?;
        push(&mut rec, n + 1, &state);
    }
    Ok(rec)
}

/// One path of `steps` steps on the stream `seed`.
pub fn simulate(cfg: &ScenarioConfig, seed: u64, steps: u64) -> Result<Sample> {
    if steps > cfg.budget {
        return Err(Error::BudgetExceeded(format!("{steps} steps exceed the budget {}", cfg.budget)));
    }
    let mut rng = rng::stream(seed);
    let n = steps as usize;
    Ok(match &cfg.process {
        ProcessSpec::Ar | ProcessSpec::MaxAr => {
            let ens = cfg.ensemble.as_ref().expect("validated ensemble");
            Sample::Trajectory(run_ar(&Environment::draw(ens, &cfg.innovation, n, &mut rng)?)?)
        }
        ProcessSpec::Branching { offspring } => {
            let ens = cfg.ensemble.as_ref().expect("validated ensemble");
            Sample::Trajectory(branching_trajectory(ens, cfg, *offspring, n, &mut rng)?)
        }
        ProcessSpec::Exchange { t } => {
            let r0 = cfg.innovation.sample(&mut rng);
            Sample::Trajectory(simulate_exchange(t, &cfg.innovation, r0, n, &mut rng))
        }
        ProcessSpec::CookieWalk { omega } => {
            let walk = CookieWalkConfig {
                omega: omega.clone(),
                cookies: cfg.innovation.clone(),
                steps,
            };
            let mut rec = TrajectoryRecord::new(vec!["position".into()]);
            simulate_cookie_walk_with(&walk, &mut rng, |k, pos| {
                rec.push(k, vec![pos as f64], pos.unsigned_abs() as f64)
            })?;
            Sample::Trajectory(rec)
        }
        ProcessSpec::Frog {
            p,
            r,
            site_cap,
            wake_cap,
            step_cap,
        } => {
            let frog = FrogConfig {
                p: *p,
                r: *r,
                sleep_law: cfg.innovation.clone(),
                site_cap: *site_cap,
                wake_cap: *wake_cap,
                step_cap: *step_cap,
            };
            Sample::Frog(simulate_frog(&frog, &mut rng)?)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta<'a> {
    pub seed: u64,
    pub versions: Versions,
    pub config: &'a ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub package: &'static str,
    pub report_format: u32,
}

pub const REPORT_FORMAT: u32 = 1;

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `report.json`, `meta.json` and `trajectories/*.csv` under `dir`.
pub fn write_run<T: Serialize>(dir: &Path, cfg: &ScenarioConfig, report: &T) -> Result<Vec<PathBuf>> {
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir)?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    write_atomic(&report_path, &to_json(report))?;
    written.push(report_path);

    let meta = Meta {
        seed: cfg.probe.seed,
        versions: Versions {
            package: env!("CARGO_PKG_VERSION"),
            report_format: REPORT_FORMAT,
        },
        config: cfg,
    };
    let meta_path = dir.join("meta.json");
    write_atomic(&meta_path, &to_json(&meta))?;
    written.push(meta_path);

    if let Sample::Trajectory(rec) = simulate(cfg, cfg.probe.seed, cfg.probe.horizon.min(MAX_TRAJECTORY_STEPS))? {
        let path = traj_dir.join(format!("{}_seed{}.csv", cfg.process.name(), cfg.probe.seed));
        write_atomic(&path, &rec.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Loads a scenario, evaluates it and writes the run directory.
pub fn run_scenario(config_path: &Path, out_dir: &Path) -> Result<ScenarioReport> {
    let cfg = ScenarioConfig::load(config_path)?;
    let report = evaluate(&cfg)?;
    write_run(out_dir, &cfg, &report)?;
    Ok(report)
}
