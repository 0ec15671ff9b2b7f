//! Scenario configuration files.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classify::{SeriesOptions, DEFAULT_N_MAX, DEFAULT_TAU};
use crate::dist::{FiniteLaw, InnovationLaw};
use crate::error::{Error, Result};
use crate::matrix_env::{LyapunovOptions, MatrixEnsemble};
use crate::processes::OffspringFamily;

/// Default cap on `horizon × replicas` for one probe.
pub const DEFAULT_STEP_BUDGET: u64 = 2_000_000_000;

fn default_site_cap() -> u64 {
    1_000_000
}

fn default_wake_cap() -> u64 {
    1_000_000
}

fn default_step_cap() -> u64 {
    crate::processes::frog::DEFAULT_STEP_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// `X_n = A_n X_{n−1} + Y_n`.
    Ar,
    /// `M_n = max(A_n M_{n−1}, Y_n)`.
    MaxAr,
    /// Branching with immigration `⌊Y_n⌋`.
    Branching {
        #[serde(default)]
        offspring: OffspringFamily,
    },
    /// `R_n = max(R_{n−1} − T_n, W_n)` with `W` the innovation law.
    Exchange { t: FiniteLaw },
    /// Mortal frogs; the innovation law gives the sleepers per site.
    Frog {
        p: f64,
        r: f64,
        #[serde(default = "default_site_cap")]
        site_cap: u64,
        #[serde(default = "default_wake_cap")]
        wake_cap: u64,
        #[serde(default = "default_step_cap")]
        step_cap: u64,
    },
    /// Cookie walk; the innovation law gives the cookies per site.
    CookieWalk { omega: FiniteLaw },
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Ar => "ar",
            ProcessSpec::MaxAr => "max_ar",
            ProcessSpec::Branching { .. } => "branching",
            ProcessSpec::Exchange { .. } => "exchange",
            ProcessSpec::Frog { .. } => "frog",
            ProcessSpec::CookieWalk { .. } => "cookie_walk",
        }
    }

    pub fn needs_ensemble(&self) -> bool {
        matches!(self, ProcessSpec::Ar | ProcessSpec::MaxAr | ProcessSpec::Branching { .. })
    }
}

fn default_y_grid() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}

fn default_n_max() -> u64 {
    DEFAULT_N_MAX
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    #[serde(default = "default_y_grid")]
    pub y_grid: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            y_grid: default_y_grid(),
            n_max: default_n_max(),
            tau: default_tau(),
        }
    }
}

impl ClassifierConfig {
    pub fn options(&self) -> SeriesOptions {
        SeriesOptions {
            n_max: self.n_max,
            tau: self.tau,
        }
    }
}

fn default_horizon() -> u64 {
    10_000
}

fn default_replicas() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// Thresholds `b`; defaults to `{1, 10, 100}` times the innovation median.
    #[serde(default)]
    pub b_grid: Option<Vec<f64>>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            b_grid: None,
            horizon: default_horizon(),
            replicas: default_replicas(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    pub steps: usize,
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub burn_in: Option<usize>,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            steps: 20_000,
            replicas: 32,
            seed: 0,
            burn_in: None,
        }
    }
}

impl LyapunovConfig {
    pub fn options(&self) -> LyapunovOptions {
        let mut o = LyapunovOptions::new(self.steps, self.replicas, self.seed);
        o.burn_in = self.burn_in;
        o
    }
}

/// A full scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub process: ProcessSpec,
    pub ensemble: Option<MatrixEnsemble>,
    pub innovation: InnovationLaw,
    pub classifier: ClassifierConfig,
    pub probe: ProbeConfig,
    pub lyapunov: LyapunovConfig,
    /// Cap on `horizon × replicas`.
    pub budget: u64,
}

const KNOWN_FIELDS: [&str; 7] = [
    "process",
    "ensemble",
    "innovation",
    "classifier",
    "probe",
    "lyapunov",
    "budget",
];

fn section<T: DeserializeOwned>(root: &serde_json::Map<String, Value>, field: &str) -> Result<Option<T>> {
    match root.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let parsed: std::result::Result<T, _> = serde_path_to_error::deserialize(v.clone());
            parsed.map(Some).map_err(|e| {
                let path = e.path().to_string();
                let at = if path == "." || path.is_empty() {
                    field.to_string()
                } else {
                    format!("{field}.{path}")
                };
                Error::config(at, e.inner().to_string())
            })
        }
    }
}

fn required<T: DeserializeOwned>(root: &serde_json::Map<String, Value>, field: &str) -> Result<T> {
    section(root, field)?.ok_or_else(|| Error::config(field, "missing required field"))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        let root = value
            .as_object()
            .ok_or_else(|| Error::config("<root>", "scenario must be a JSON object"))?;
        if let Some(unknown) = root.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
            return Err(Error::config(unknown.clone(), "unknown field"));
        }
        let process: ProcessSpec = required(root, "process")?;
        let ensemble: Option<MatrixEnsemble> = section(root, "ensemble")?;
        let innovation: InnovationLaw = required(root, "innovation")?;
        let cfg = ScenarioConfig {
            process,
            ensemble,
            innovation,
            classifier: section(root, "classifier")?.unwrap_or_default(),
            probe: section(root, "probe")?.unwrap_or_default(),
            lyapunov: section(root, "lyapunov")?.unwrap_or_default(),
            budget: section(root, "budget")?.unwrap_or(DEFAULT_STEP_BUDGET),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let at = |field: &str, e: Error| match e {
            Error::Config { .. } => e,
            other => Error::config(field, other.to_string()),
        };
        self.innovation.validate().map_err(|e| at("innovation", e))?;
        if self.process.needs_ensemble() {
            let ens = self
                .ensemble
                .as_ref()
                .ok_or_else(|| Error::config("ensemble", format!("required for process `{}`", self.process.name())))?;
            if ens.dim() != self.innovation.dim() {
                return Err(Error::config(
                    "innovation",
                    format!("dimension {} does not match ensemble dimension {}", self.innovation.dim(), ens.dim()),
                ));
            }
            if let ProcessSpec::Branching { offspring } = &self.process {
                offspring.validate(ens).map_err(|e| at("process.offspring", e))?;
            }
        } else if self.innovation.dim() != 1 {
            return Err(Error::config("innovation", "must be scalar for this process"));
        }
        match &self.process {
            ProcessSpec::Exchange { t } => {
                let (lo, hi) = t.support_range();
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::config("process.t", "must be bounded"));
                }
            }
            ProcessSpec::Frog { p, r, .. } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::config("process.p", "must lie in (0,1]"));
                }
                if !(*r > 0.0 && *r < 1.0) {
                    return Err(Error::config("process.r", "must lie in (0,1)"));
                }
                if !self.innovation.is_integer_valued() {
                    return Err(Error::config("innovation", "sleeper counts must be integer valued"));
                }
            }
            ProcessSpec::CookieWalk { omega } => {
                let (lo, hi) = omega.support_range();
                if !(lo > 0.0 && hi < 1.0) {
                    return Err(Error::config("process.omega", "must lie in (0,1)"));
                }
                if !self.innovation.is_integer_valued() {
                    return Err(Error::config("innovation", "cookie counts must be integer valued"));
                }
            }
            _ => {}
        }
        if self.classifier.y_grid.is_empty() || self.classifier.y_grid.iter().any(|y| !(*y >= 0.0 && y.is_finite())) {
            return Err(Error::config("classifier.y_grid", "must be a nonempty list of finite nonnegative anchors"));
        }
        if self.classifier.n_max < 100 {
            return Err(Error::config("classifier.n_max", "must be at least 100"));
        }
        if !(self.classifier.tau > 0.0 && self.classifier.tau < 1.0) {
            return Err(Error::config("classifier.tau", "must lie in (0,1)"));
        }
        if let Some(b) = &self.probe.b_grid {
            if b.is_empty() || b.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::config("probe.b_grid", "must be a nonempty list of positive thresholds"));
            }
            if b.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::config("probe.b_grid", "must be sorted ascending"));
            }
        }
        if self.probe.horizon < 10 {
            return Err(Error::config("probe.horizon", "must be at least 10"));
        }
        if self.probe.replicas == 0 {
            return Err(Error::config("probe.replicas", "must be positive"));
        }
        if self.lyapunov.steps < 2 || self.lyapunov.replicas == 0 {
            return Err(Error::config("lyapunov", "needs steps >= 2 and replicas >= 1"));
        }
        Ok(())
    }

    /// Canonical JSON echo of the parsed configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZG: &str = r#"{
        "process": {"kind": "ar"},
        "ensemble": {"dim": 1, "atoms": [{"matrix": [[0.5]], "p": 1.0}]},
        "innovation": {"kind": "log_pareto", "beta": 1.0, "p": 2.0},
        "classifier": {"y_grid": [0.5, 1, 10], "n_max": 100000},
        "probe": {"b_grid": [1, 10], "horizon": 1000, "replicas": 10, "seed": 3}
    }"#;

    #[test]
    fn parses_full_scenario() {
        let c = ScenarioConfig::from_json(ZG).unwrap();
        assert_eq!(c.process, ProcessSpec::Ar);
        assert_eq!(c.classifier.tau, DEFAULT_TAU);
        assert_eq!(c.probe.seed, 3);
    }

    #[test]
    fn missing_process_names_the_field() {
        let text = ZG.replace(r#""process": {"kind": "ar"},"#, "");
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "process"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_errors_carry_a_path() {
        let text = ZG.replace(r#""beta": 1.0"#, r#""beta": "x""#);
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert!(field.starts_with("innovation"), "{field}"),
            other => panic!("{other:?}"),
        }
        let text = ZG.replace(r#""b_grid": [1, 10]"#, r#""b_grid": [10, 1]"#);
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "probe.b_grid"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ensemble_required_for_ar() {
        let text = ZG.replace(r#""ensemble": {"dim": 1, "atoms": [{"matrix": [[0.5]], "p": 1.0}]},"#, "");
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "ensemble"),
            other => panic!("{other:?}"),
        }
    }
}
