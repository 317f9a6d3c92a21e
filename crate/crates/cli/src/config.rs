//! Experiment configuration, parsed from TOML.
//!
//! ```toml
//! map = "doubling:2"
//! noise = "uniform:epsilon=0.25:boundary=wrap"
//! seed = 7
//!
//! [grid]
//! m = 512
//!
//! [scenario]
//! kind = "evl"
//! taus = [0.5, 1.0, 2.0]
//! ns = [5000]
//! trials = 20000
//! ```

use std::path::Path;

use raremap_core::{MapSpec, NoiseSpec, RandomMap};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid<T>(field: &str, reason: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: String,
    pub noise: String,
    pub seed: u64,
    pub grid: GridSection,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// Initial points from the grid stationary density.
    #[default]
    Stationary,
    /// 5000 perturbed steps from a fixed point before each trial.
    BurnIn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Markov(MarkovParams),
    Decay(DecayParams),
    Evl(EvlParams),
    Hts(HtsParams),
    Repp(ReppParams),
    Dprime(DPrimeParams),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Markov(_) => "markov",
            Scenario::Decay(_) => "decay",
            Scenario::Evl(_) => "evl",
            Scenario::Hts(_) => "hts",
            Scenario::Repp(_) => "repp",
            Scenario::Dprime(_) => "dprime",
        }
    }
}

fn default_gamma() -> f64 {
    0.75
}
fn one() -> usize {
    1
}
fn default_k_max() -> usize {
    64
}
fn default_n_max() -> usize {
    40
}
fn default_cor_n() -> usize {
    20
}
fn default_center() -> f64 {
    0.3
}
fn default_taus() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_tau() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovParams {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub k: usize,
    /// Largest power tried when certifying primitivity.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Correlations are computed for `n = 1..=cor_n`.
    #[serde(default = "default_cor_n")]
    pub cor_n: usize,
    /// `φ(x) = dist(x, phi_center)`.
    pub phi_center: f64,
    /// `ψ = 1{x > psi_threshold}`.
    pub psi_threshold: f64,
    /// Whether the correlation envelope fit is a pass criterion.
    #[serde(default = "yes")]
    pub check_correlation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvlParams {
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    pub ns: Vec<u64>,
    pub trials: u64,
    #[serde(default)]
    pub start: StartMode,
    /// Compare with `e^{−τ}`.
    #[serde(default = "yes")]
    pub check_limit: bool,
    /// Compare with the grid-exact taboo probability.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtsParams {
    #[serde(default = "default_center")]
    pub center: f64,
    /// Target ball mass `μ̂(U)`.
    pub mass: f64,
    /// Samples of each kind.
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReppParams {
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub n: u64,
    /// Total unit windows over all trajectories.
    pub windows: u64,
    #[serde(default = "one_u64")]
    pub trajectories: u64,
    #[serde(default)]
    pub start: StartMode,
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DPrimeParams {
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub ns: Vec<u64>,
    /// Total simulated length is `n · trials`.
    pub trials: u64,
    /// Fixed `k_n`; `⌈√n⌉` when absent.
    #[serde(default)]
    pub k_n: Option<u64>,
    #[serde(default)]
    pub start: StartMode,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn system(&self) -> Result<RandomMap, ConfigError> {
        let map: MapSpec = self.map.parse().or_else(|e| invalid("map", format!("{e}")))?;
        let noise: NoiseSpec = self.noise.parse().or_else(|e| invalid("noise", format!("{e}")))?;
        RandomMap::new(map, noise).or_else(|e| invalid("noise", format!("{e}")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let system = self.system()?;
        let domain = system.map.domain();
        if !(64..=4096).contains(&self.grid.m) {
            return invalid("grid.m", format!("must lie in 64..=4096, got {}", self.grid.m));
        }
        let center = |c: f64| {
            if domain.contains(c) {
                Ok(())
            } else {
                invalid("scenario.center", format!("{c} is outside the phase space {domain:?}"))
            }
        };
        let tau = |t: f64, field: &str| {
            if t > 0.0 && t.is_finite() {
                Ok(())
            } else {
                invalid(field, format!("must be positive, got {t}"))
            }
        };
        let ns = |ns: &[u64]| {
            if ns.is_empty() {
                invalid("scenario.ns", "must list at least one block length")
            } else if let Some(n) = ns.iter().find(|&&n| n < 10) {
                invalid("scenario.ns", format!("block lengths must be >= 10, got {n}"))
            } else {
                Ok(())
            }
        };
        match &self.scenario {
            Scenario::Markov(p) => {
                if !(p.gamma > 0.0 && p.gamma < 1.0) {
                    return invalid("scenario.gamma", format!("must lie in (0, 1), got {}", p.gamma));
                }
                if p.k == 0 {
                    return invalid("scenario.k", "must be >= 1");
                }
                if p.k_max == 0 {
                    return invalid("scenario.k_max", "must be >= 1");
                }
            }
            Scenario::Decay(p) => {
                if p.n_max < 5 {
                    return invalid("scenario.n_max", format!("must be >= 5, got {}", p.n_max));
                }
                if p.cor_n < 5 {
                    return invalid("scenario.cor_n", format!("must be >= 5, got {}", p.cor_n));
                }
                if !domain.contains(p.phi_center) {
                    return invalid("scenario.phi_center", "outside the phase space");
                }
                if !(p.psi_threshold > domain.lower() && p.psi_threshold < domain.upper()) {
                    return invalid("scenario.psi_threshold", "must lie inside the phase space");
                }
            }
            Scenario::Evl(p) => {
                center(p.center)?;
                if p.taus.is_empty() {
                    return invalid("scenario.taus", "must list at least one tau");
                }
                for &t in &p.taus {
                    tau(t, "scenario.taus")?;
                }
                ns(&p.ns)?;
                if p.trials < 100 {
                    return invalid("scenario.trials", format!("must be >= 100, got {}", p.trials));
                }
            }
            Scenario::Hts(p) => {
                center(p.center)?;
                if !(p.mass > 0.0 && p.mass < 0.5) {
                    return invalid("scenario.mass", format!("must lie in (0, 0.5), got {}", p.mass));
                }
                if p.samples < 500 {
                    return invalid("scenario.samples", format!("must be >= 500, got {}", p.samples));
                }
            }
            Scenario::Repp(p) => {
                center(p.center)?;
                tau(p.tau, "scenario.tau")?;
                ns(&[p.n])?;
                if p.tau / p.n as f64 >= 1.0 {
                    return invalid("scenario.tau", "tau / n must be below 1");
                }
                if p.trajectories == 0 {
                    return invalid("scenario.trajectories", "must be >= 1");
                }
                if p.windows < 200 * p.trajectories {
                    return invalid("scenario.windows", "need at least 200 windows per trajectory");
                }
            }
            Scenario::Dprime(p) => {
                center(p.center)?;
                tau(p.tau, "scenario.tau")?;
                ns(&p.ns)?;
                if p.trials == 0 {
                    return invalid("scenario.trials", "must be >= 1");
                }
                if p.k_n == Some(0) {
                    return invalid("scenario.k_n", "must be >= 1");
                }
            }
        }
        Ok(())
    }
}
