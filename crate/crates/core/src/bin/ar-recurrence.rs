use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ar_recurrence::classify::lambda_for;
use ar_recurrence::dist::{FiniteLaw, InnovationLaw};
use ar_recurrence::error::Error;
use ar_recurrence::harness::config::{ClassifierConfig, LyapunovConfig, ProbeConfig, DEFAULT_STEP_BUDGET};
use ar_recurrence::harness::run::{classify_scenario, to_json, write_run};
use ar_recurrence::harness::selftest::selftest_with;
use ar_recurrence::harness::{evaluate, simulate, ProcessSpec, Sample, ScenarioConfig};
use ar_recurrence::matrix_env::{check_pr, estimate_lyapunov, exact_lambda};

#[derive(Parser)]
#[command(name = "ar-recurrence", version, about = "Recurrence and transience of random autoregressive chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic verdict for a scenario.
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Write report.json, meta.json and a sample trajectory here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One seeded sample path as CSV (frog runs print a JSON summary).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Defaults to the probe horizon.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Lyapunov exponent of the scenario's ensemble.
    Lyapunov {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classifier, Monte Carlo probe and their agreement.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mortal frogs on the integers.
    Frog {
        /// Survival probability per step.
        #[arg(long)]
        p: f64,
        /// Jump probability to the right.
        #[arg(long)]
        r: f64,
        /// Sleepers per site as a JSON law.
        #[arg(long, default_value = r#"{"kind":"deterministic","value":1}"#)]
        sleep: String,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        wake_cap: u64,
        /// Frog moves per run before the run is cut off.
        #[arg(long, default_value_t = 1_000_000)]
        step_cap: u64,
    },
    /// Random walk in a random environment with cookies.
    CookieWalk {
        /// Environment law as a number or `{"values": [...], "probs": [...]}`.
        #[arg(long)]
        omega: String,
        /// Cookies per site as a JSON law.
        #[arg(long, default_value = r#"{"kind":"geometric","q":0.5}"#)]
        cookies: String,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs the invariant battery.
    Selftest,
}

enum Failure {
    Error(Error),
    Disagreement,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(field: &str, text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::config(field, e.to_string()))
}

fn inline_scenario(process: ProcessSpec, innovation: InnovationLaw, probe: ProbeConfig) -> Result<ScenarioConfig, Error> {
    let cfg = ScenarioConfig {
        process,
        ensemble: None,
        innovation,
        classifier: ClassifierConfig::default(),
        probe,
        lyapunov: LyapunovConfig::default(),
        budget: DEFAULT_STEP_BUDGET,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn validate_and_report(cfg: &ScenarioConfig, out: Option<&PathBuf>) -> Result<(), Failure> {
    let report = evaluate(cfg)?;
    if let Some(dir) = out {
        write_run(dir, cfg, &report)?;
    }
    print!("{}", to_json(&report));
    eprintln!("agreement: {:?} ({})", report.agreement.status, report.agreement.detail);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Disagreement)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = classify_scenario(&cfg)?;
            if let Some(dir) = out {
                write_run(&dir, &cfg, &report)?;
            }
            print!("{}", to_json(&report));
        }
        Command::Simulate { config, seed, steps } => {
            let cfg = ScenarioConfig::load(&config)?;
            match simulate(&cfg, seed, steps.unwrap_or(cfg.probe.horizon))? {
                Sample::Trajectory(rec) => print!("{}", rec.to_csv()),
                Sample::Frog(outcome) => print!("{}", to_json(&outcome)),
            }
        }
        Command::Lyapunov { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let ens = cfg
                .ensemble
                .as_ref()
                .ok_or_else(|| Error::config("ensemble", "this scenario has no matrix ensemble"))?;
            let opts = cfg.lyapunov.options();
            let pr = (1..=4).find_map(|k| check_pr(ens, k).ok().flatten().map(|kappa| json!({"k": k, "kappa": kappa})));
            let out = json!({
                "lambda": lambda_for(ens, opts)?,
                "exact": exact_lambda(ens),
                "estimate": estimate_lyapunov(ens, opts)?,
                "positive_product": pr,
            });
            print!("{}", to_json(&out));
        }
        Command::Validate { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            validate_and_report(&cfg, out.as_ref())?;
        }
        Command::Frog {
            p,
            r,
            sleep,
            runs,
            seed,
            wake_cap,
            step_cap,
        } => {
            let law: InnovationLaw = parse_json("sleep", &sleep)?;
            let process = ProcessSpec::Frog {
                p,
                r,
                site_cap: 1_000_000,
                wake_cap,
                step_cap,
            };
            let probe = ProbeConfig {
                replicas: runs,
                seed,
                ..ProbeConfig::default()
            };
            validate_and_report(&inline_scenario(process, law, probe)?, None)?;
        }
        Command::CookieWalk {
            omega,
            cookies,
            steps,
            replicas,
            seed,
        } => {
            let omega: FiniteLaw = parse_json("omega", &omega)?;
            let law: InnovationLaw = parse_json("cookies", &cookies)?;
            let probe = ProbeConfig {
                b_grid: Some(vec![1.0, 10.0, 100.0]),
                horizon: steps,
                replicas,
                seed,
            };
            validate_and_report(&inline_scenario(ProcessSpec::CookieWalk { omega }, law, probe)?, None)?;
        }
        Command::Selftest => {
            let report = selftest_with(|s| {
                println!("{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
            });
            let failed = report.suites.iter().filter(|s| !s.passed).count();
            println!("{} suites, {} failed", report.suites.len(), failed);
            if !report.passed {
                return Err(Failure::Disagreement);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Disagreement) => ExitCode::from(2),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded(_) | Error::PopulationOverflow(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
