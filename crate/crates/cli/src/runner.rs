//! Runs a configured scenario into an output directory and writes the
//! reproducibility manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::scenario::{run_scenario, Criterion, RunError, Setup};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub code_version: &'static str,
    pub scenario: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
}

/// Run `config` and write every artifact plus `manifest.json` into `out`.
/// The manifest is written even when the scenario errors out.
pub fn run_to_dir(config: &ExperimentConfig, out: &Path) -> Result<Manifest, RunError> {
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let mut manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario.name(),
        seed: config.seed,
        config: config.clone(),
        threads: rayon::current_num_threads(),
        wall_time_seconds: 0.0,
        pass: false,
        criteria: Vec::new(),
        artifacts: Vec::new(),
        error: None,
    };
    let outcome = Setup::new(config).and_then(|setup| run_scenario(config, &setup));
    let result = outcome.and_then(|res| {
        for a in &res.artifacts {
            fs::write(out.join(&a.name), &a.contents)?;
            manifest.artifacts.push(a.name.clone());
        }
        let report_name = format!("{}.json", config.scenario.name());
        fs::write(out.join(&report_name), to_pretty(&res.report)?)?;
        manifest.artifacts.push(report_name);
        manifest.pass = !res.criteria.is_empty() && res.criteria.iter().all(|c| c.pass);
        manifest.criteria = res.criteria;
        Ok(())
    });
    if let Err(e) = &result {
        manifest.error = Some(e.to_string());
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    fs::write(out.join(MANIFEST), to_pretty(&serde_json::to_value(&manifest)?)?)?;
    result.map(|_| manifest)
}

fn to_pretty(value: &Value) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
