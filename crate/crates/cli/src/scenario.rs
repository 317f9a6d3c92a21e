//! Scenario runners. Each returns a typed outcome that knows its pass
//! criteria, its JSON report and its CSV artifacts.

use std::fmt::Write as _;

use raremap_core::dynamics::MapSpec;
use raremap_core::extremes::{
    build_observable, calibrate_levels, dprime_statistic, evl_estimate, DPrimeEstimate, EvlEstimate, GVariant, KnRule,
    LevelSchedule, Observable, TargetBall,
};
use raremap_core::grid::{
    constructive_doeblin_bounds, correlation, discretize, doeblin_margin, fit_geometric_rate, positivity_report,
    stationary, taboo_survival, tv_profile, write_stationary_csv, DoeblinBounds, GeometricRate, GridKernel,
    PositivityReport, StationaryDensity, DEFAULT_TOL,
};
use raremap_core::noise::{Boundary, PerturbationReport, RandomMap};
use raremap_core::recurrence::{
    hts_from_rts, hts_test, kac_check, sample_hitting_times, HitKind, HittingRun, HtsReport, KacResult,
};
use raremap_core::repp::{poisson_tests, pool, simulate_exceedances, ExceedanceSeries, PoissonTests};
use raremap_core::stats::EmpiricalCdf;
use raremap_core::StartLaw;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ConfigError, DPrimeParams, DecayParams, EvlParams, ExperimentConfig, HtsParams, MarkovParams, ReppParams, Scenario,
    StartMode,
};

pub const BURN_IN_STEPS: usize = 5000;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] raremap_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub requirement: String,
}

impl Criterion {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, requirement: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            requirement: requirement.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub criteria: Vec<Criterion>,
    pub report: Value,
    pub artifacts: Vec<Artifact>,
}

/// Everything derived from the map, noise and grid sections.
#[derive(Debug, Clone)]
pub struct Setup {
    pub system: RandomMap,
    pub kernel: GridKernel,
    pub density: StationaryDensity,
    pub perturbation: PerturbationReport,
    pub seed: u64,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self, RunError> {
        let system = config.system()?;
        let kernel = discretize(&system, config.grid.m)?;
        let density = stationary(&kernel, DEFAULT_TOL)?;
        let perturbation = system.verify_perturbation_conditions(config.grid.m.max(64))?;
        Ok(Self {
            system,
            kernel,
            density,
            perturbation,
            seed: config.seed,
        })
    }

    fn start_law(&self, mode: StartMode) -> StartLaw<'_> {
        match mode {
            StartMode::Stationary => StartLaw::Stationary(&self.density),
            StartMode::BurnIn => {
                let d = self.system.map.domain();
                StartLaw::BurnIn {
                    x0: 0.5 * (d.lower() + d.upper()),
                    steps: BURN_IN_STEPS,
                }
            }
        }
    }

    fn observable(&self, center: f64) -> Result<Observable, RunError> {
        Ok(build_observable(center, GVariant::NegLog, &self.density)?)
    }
}

pub fn run_scenario(config: &ExperimentConfig, setup: &Setup) -> Result<ScenarioResult, RunError> {
    Ok(match &config.scenario {
        Scenario::Markov(p) => run_markov(setup, p)?.into_result(),
        Scenario::Decay(p) => run_decay(setup, p)?.into_result(),
        Scenario::Evl(p) => run_evl(setup, p)?.into_result(),
        Scenario::Hts(p) => run_hts(setup, p)?.into_result(),
        Scenario::Repp(p) => run_repp(setup, p)?.into_result(),
        Scenario::Dprime(p) => run_dprime(setup, p)?.into_result(),
    })
}

fn preserves_lebesgue(system: &RandomMap) -> bool {
    matches!(system.map, MapSpec::Doubling { .. }) && system.noise.boundary == Boundary::Wrap
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovOutcome {
    pub m: usize,
    pub iterations: usize,
    /// `‖πP − π‖₁`.
    pub invariance_residual: f64,
    /// `max_i |h_i − 1|`, reported for Lebesgue-preserving systems.
    pub uniform_deviation: Option<f64>,
    pub gamma: f64,
    pub k: usize,
    pub doeblin_margin: f64,
    pub constructive: DoeblinBounds,
    /// `2q̄/m`.
    pub grid_slack: f64,
    pub perturbation: PerturbationReport,
    pub positivity: PositivityReport,
    #[serde(skip)]
    stationary_csv: String,
}

pub fn run_markov(setup: &Setup, p: &MarkovParams) -> Result<MarkovOutcome, RunError> {
    let k = &setup.kernel;
    let invariance_residual = setup.density.invariance_residual(k);
    let uniform_deviation = preserves_lebesgue(&setup.system).then(|| {
        setup
            .density
            .density()
            .iter()
            .map(|h| (h - 1.0).abs())
            .fold(0.0, f64::max)
    });
    let mut csv = Vec::new();
    write_stationary_csv(k, &setup.density, &mut csv)?;
    Ok(MarkovOutcome {
        m: k.m(),
        iterations: setup.density.iterations(),
        invariance_residual,
        uniform_deviation,
        gamma: p.gamma,
        k: p.k,
        doeblin_margin: doeblin_margin(k, p.gamma, p.k)?,
        constructive: constructive_doeblin_bounds(&setup.perturbation, p.gamma, k.space().length()),
        grid_slack: 2.0 * setup.perturbation.upper_q / k.m() as f64,
        perturbation: setup.perturbation,
        positivity: positivity_report(k, &setup.density, &setup.perturbation, p.k_max),
        stationary_csv: String::from_utf8(csv).expect("csv is ascii"),
    })
}

impl MarkovOutcome {
    pub fn criteria(&self) -> Vec<Criterion> {
        let mut out = vec![Criterion::new(
            "stationary_invariance",
            self.invariance_residual <= 1e-10,
            self.invariance_residual,
            "|pi P - pi|_1 <= 1e-10",
        )];
        if let Some(dev) = self.uniform_deviation {
            out.push(Criterion::new("uniform_density", dev < 1e-6, dev, "max|h - 1| < 1e-6"));
        }
        out.push(Criterion::new(
            "doeblin_positive",
            self.doeblin_margin > 0.0,
            self.doeblin_margin,
            "delta_hat > 0",
        ));
        let bound = self.constructive.ball_overlap - self.grid_slack;
        out.push(Criterion::new(
            "doeblin_ball_bound",
            self.doeblin_margin >= bound,
            self.doeblin_margin,
            format!("delta_hat >= q_lo (gamma L + 2 rho0 - L)+ - 2 q_hi / m = {bound}"),
        ));
        out.push(Criterion::new(
            "primitive",
            self.positivity.primitivity_index.is_some(),
            self.positivity.primitivity_index.map_or(f64::NAN, |n| n as f64),
            "some power of P is entrywise positive",
        ));
        let p = &self.positivity;
        out.push(Criterion::new(
            "density_lower_bound",
            p.min_density > 0.0
                && p.covering_bound <= p.min_density * (1.0 + 1e-9)
                && p.min_density <= 4.0 * p.covering_bound,
            p.min_density / p.covering_bound,
            "0 < covering bound <= min h <= 4 covering bound",
        ));
        out
    }

    pub fn into_result(self) -> ScenarioResult {
        ScenarioResult {
            criteria: self.criteria(),
            report: serde_json::to_value(&self).expect("serializable"),
            artifacts: vec![Artifact {
                name: "stationary.csv".into(),
                contents: self.stationary_csv,
            }],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOutcome {
    /// `profile[k] = d(k + 1)`.
    pub profile: Vec<f64>,
    pub fit: GeometricRate,
    /// `correlations[k]` is the correlation after `k + 1` steps.
    pub correlations: Vec<f64>,
    pub correlation_fit: GeometricRate,
    pub check_correlation: bool,
}

pub fn run_decay(setup: &Setup, p: &DecayParams) -> Result<DecayOutcome, RunError> {
    let k = &setup.kernel;
    let space = k.space();
    let profile = tv_profile(k, &setup.density, p.n_max)?;
    let fit = fit_geometric_rate(&profile)?;
    let x = k.midpoints();
    let phi: Vec<f64> = x.iter().map(|&v| space.distance(v, p.phi_center)).collect();
    let psi: Vec<f64> = x.iter().map(|&v| f64::from(v > p.psi_threshold)).collect();
    let correlations = (1..=p.cor_n)
        .map(|n| correlation(k, &setup.density, &phi, &psi, n))
        .collect::<raremap_core::Result<Vec<f64>>>()?;
    let correlation_fit = fit_geometric_rate(&correlations)?;
    Ok(DecayOutcome {
        profile,
        fit,
        correlations,
        correlation_fit,
        check_correlation: p.check_correlation,
    })
}

fn r_squared(rate: &GeometricRate) -> f64 {
    match rate {
        GeometricRate::Fitted { r_squared, .. } => *r_squared,
        GeometricRate::Converged { .. } => f64::NAN,
    }
}

impl DecayOutcome {
    /// Largest `Cor(n) − 2 d(n)` over the common range.
    pub fn domination_excess(&self) -> f64 {
        self.correlations
            .iter()
            .zip(&self.profile)
            .map(|(c, d)| c - 2.0 * d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn criteria(&self) -> Vec<Criterion> {
        let lambda = self.fit.lambda().unwrap_or(f64::NAN);
        let mut out = vec![Criterion::new(
            "tv_geometric",
            self.fit.is_geometric() && lambda > 1.0,
            r_squared(&self.fit),
            "fit of log d(n): r^2 >= 0.99 and lambda > 1",
        )];
        if self.check_correlation {
            let r2 = r_squared(&self.correlation_fit);
            out.push(Criterion::new(
                "correlation_envelope",
                r2 >= 0.95 && self.correlation_fit.lambda().is_some_and(|l| l > 1.0),
                r2,
                "exponential fit of Cor(n): r^2 >= 0.95",
            ));
        }
        let excess = self.domination_excess();
        out.push(Criterion::new(
            "correlation_dominated",
            excess <= 1e-15,
            excess,
            "Cor(n) <= 2 d(n) for every n",
        ));
        out
    }

    pub fn into_result(self) -> ScenarioResult {
        let mut tv = String::from("n,d\n");
        for (k, d) in self.profile.iter().enumerate() {
            writeln!(tv, "{},{d:e}", k + 1).unwrap();
        }
        let mut cor = String::from("n,cor\n");
        for (k, c) in self.correlations.iter().enumerate() {
            writeln!(cor, "{},{c:e}", k + 1).unwrap();
        }
        ScenarioResult {
            criteria: self.criteria(),
            report: serde_json::to_value(&self).expect("serializable"),
            artifacts: vec![
                Artifact {
                    name: "tv_profile.csv".into(),
                    contents: tv,
                },
                Artifact {
                    name: "correlation.csv".into(),
                    contents: cor,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvlRow {
    pub estimate: EvlEstimate,
    /// Grid-exact `P(M_n ≤ u_n)` when requested.
    pub oracle: Option<f64>,
    /// Cells where `{φ > u_n}` and the ball disagree.
    pub ball_mismatch: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvlOutcome {
    pub schedule: LevelSchedule,
    pub rows: Vec<EvlRow>,
    pub check_limit: bool,
}

pub fn run_evl(setup: &Setup, p: &EvlParams) -> Result<EvlOutcome, RunError> {
    let obs = setup.observable(p.center)?;
    let schedule = LevelSchedule::build(&obs, &p.ns, &p.taus)?;
    let law = setup.start_law(p.start);
    let m = setup.kernel.m();
    let mut rows = Vec::with_capacity(schedule.entries.len());
    for entry in &schedule.entries {
        let estimate = evl_estimate(&setup.system, &law, &obs, entry, p.trials, setup.seed)?;
        let ball_cells = obs.target(entry).cells(m);
        let value_cells = obs.exceedance_cells(entry.level, m);
        let ball_mismatch = ball_cells.iter().filter(|c| !value_cells.contains(c)).count()
            + value_cells.iter().filter(|c| !ball_cells.contains(c)).count();
        let oracle = if p.oracle && !ball_cells.is_empty() {
            let n = entry.n as usize;
            Some(taboo_survival(&setup.kernel, &setup.density, &ball_cells, n)?.survival[n])
        } else {
            None
        };
        rows.push(EvlRow {
            estimate,
            oracle,
            ball_mismatch,
        });
    }
    Ok(EvlOutcome {
        schedule,
        rows,
        check_limit: p.check_limit,
    })
}

/// `3·√(p(1 − p)/T)`.
pub fn three_sigma(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

impl EvlOutcome {
    pub fn criteria(&self) -> Vec<Criterion> {
        let mut out = Vec::new();
        for row in &self.rows {
            let e = &row.estimate;
            let tag = format!("tau={} n={}", e.tau, e.n);
            if self.check_limit {
                let tol = three_sigma(e.target, e.trials);
                out.push(Criterion::new(
                    format!("evl_limit {tag}"),
                    (e.p_hat - e.target).abs() <= tol,
                    e.p_hat,
                    format!("|p_hat - exp(-tau)| <= {tol:.5}"),
                ));
            }
            if let Some(exact) = row.oracle {
                let tol = three_sigma(exact, e.trials);
                out.push(Criterion::new(
                    format!("evl_oracle {tag}"),
                    (e.p_hat - exact).abs() <= tol,
                    e.p_hat,
                    format!("|p_hat - {exact:.6}| <= {tol:.5}"),
                ));
            }
            out.push(Criterion::new(
                format!("exceedance_ball {tag}"),
                row.ball_mismatch <= 2,
                row.ball_mismatch as f64,
                "{phi > u_n} and the ball differ in at most 2 cells",
            ));
        }
        for &n in &self
            .schedule
            .entries
            .iter()
            .map(|e| e.n)
            .collect::<std::collections::BTreeSet<_>>()
        {
            let mut by_tau: Vec<&EvlEstimate> = self.rows.iter().map(|r| &r.estimate).filter(|e| e.n == n).collect();
            by_tau.sort_by(|a, b| a.tau.total_cmp(&b.tau));
            let monotone = by_tau
                .windows(2)
                .all(|w| w[1].p_hat <= w[0].p_hat + w[0].interval.half_width() + w[1].interval.half_width());
            out.push(Criterion::new(
                format!("monotone_in_tau n={n}"),
                monotone,
                by_tau.len() as f64,
                "p_hat non-increasing in tau within confidence slack",
            ));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("tau,n,trials,p_hat,ci_lo,ci_hi,target\n");
        for row in &self.rows {
            let e = &row.estimate;
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e.tau, e.n, e.trials, e.p_hat, e.interval.lo, e.interval.hi, e.target
            )
            .unwrap();
        }
        s
    }

    pub fn into_result(self) -> ScenarioResult {
        ScenarioResult {
            criteria: self.criteria(),
            artifacts: vec![Artifact {
                name: "evl.csv".into(),
                contents: self.csv(),
            }],
            report: serde_json::to_value(&self).expect("serializable"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HtsOutcome {
    pub ball: TargetBall,
    pub hits: HittingRun,
    pub returns: HittingRun,
    pub hts: HtsReport,
    pub rts: HtsReport,
    pub kac: KacResult,
    /// Sup-distance between the HTS rebuilt from returns and the direct HTS.
    pub reconstruction_distance: f64,
}

pub fn run_hts(setup: &Setup, p: &HtsParams) -> Result<HtsOutcome, RunError> {
    let obs = setup.observable(p.center)?;
    let radius = obs.radius_for_mass(p.mass)?;
    let ball = TargetBall {
        space: obs.space(),
        center: p.center,
        radius,
        mass: obs.radial_cdf(radius),
    };
    let hits = sample_hitting_times(
        &setup.system,
        &setup.density,
        &ball,
        HitKind::Hit,
        p.samples,
        setup.seed,
    )?;
    let returns = sample_hitting_times(
        &setup.system,
        &setup.density,
        &ball,
        HitKind::Return,
        p.samples,
        setup.seed,
    )?;
    let hit_times = hits.normalized_times();
    let return_times = returns.normalized_times();
    let hts = hts_test(&hit_times)?;
    let rts = hts_test(&return_times)?;
    let kac = kac_check(&returns.raw_times(), ball.mass)?;
    let rebuilt = hts_from_rts(&EmpiricalCdf::new(&return_times)?);
    let reconstruction_distance = rebuilt.sup_distance(&EmpiricalCdf::new(&hit_times)?);
    Ok(HtsOutcome {
        ball,
        hits,
        returns,
        hts,
        rts,
        kac,
        reconstruction_distance,
    })
}

impl HtsOutcome {
    pub fn criteria(&self) -> Vec<Criterion> {
        vec![
            Criterion::new(
                "hts_ks",
                self.hts.pass,
                self.hts.ks_d,
                format!("D < {:.5}", self.hts.critical),
            ),
            Criterion::new(
                "rts_ks",
                self.rts.pass,
                self.rts.ks_d,
                format!("D < {:.5}", self.rts.critical),
            ),
            Criterion::new(
                "hts_mean",
                (self.hts.mean - 1.0).abs() <= 4.0 * self.hts.mean_se,
                self.hts.mean,
                format!("|mean - 1| <= 4 SE = {:.5}", 4.0 * self.hts.mean_se),
            ),
            Criterion::new(
                "kac",
                (0.95..=1.05).contains(&self.kac.product),
                self.kac.product,
                "mean return time * mass in [0.95, 1.05]",
            ),
            Criterion::new(
                "hts_from_rts",
                self.reconstruction_distance <= 0.04,
                self.reconstruction_distance,
                "sup |G_rebuilt - G_direct| <= 0.04",
            ),
            Criterion::new(
                "censoring_hit",
                self.hits.is_valid(),
                self.hits.censored_fraction(),
                "censored fraction < 1e-3",
            ),
            Criterion::new(
                "censoring_return",
                self.returns.is_valid(),
                self.returns.censored_fraction(),
                "censored fraction < 1e-3",
            ),
        ]
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("kind,raw_time,normalized_time\n");
        for sample in self.hits.samples.iter().chain(&self.returns.samples) {
            writeln!(
                s,
                "{},{},{}",
                sample.kind.as_str(),
                sample.raw_time,
                sample.normalized_time
            )
            .unwrap();
        }
        s
    }

    pub fn into_result(self) -> ScenarioResult {
        let report = json!({
            "ball": self.ball,
            "hts": self.hts,
            "rts": self.rts,
            "kac": self.kac,
            "reconstruction_distance": self.reconstruction_distance,
            "hit_censored_fraction": self.hits.censored_fraction(),
            "return_censored_fraction": self.returns.censored_fraction(),
        });
        ScenarioResult {
            criteria: self.criteria(),
            artifacts: vec![Artifact {
                name: "hts.csv".into(),
                contents: self.csv(),
            }],
            report,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReppOutcome {
    pub ball: TargetBall,
    pub rescale: f64,
    pub tests: PoissonTests,
    #[serde(skip)]
    pub series: Vec<ExceedanceSeries>,
}

pub fn run_repp(setup: &Setup, p: &ReppParams) -> Result<ReppOutcome, RunError> {
    let obs = setup.observable(p.center)?;
    let entry = calibrate_levels(&obs, p.n, p.tau)?;
    let ball = obs.target(&entry);
    let rescale = 1.0 / ball.mass;
    let per_trajectory = p.windows.div_ceil(p.trajectories);
    let horizon = (per_trajectory as f64 * rescale).ceil() as u64;
    let law = setup.start_law(p.start);
    let series = simulate_exceedances(&setup.system, &law, &ball, horizon, p.trajectories, setup.seed)?;
    let (counts, gaps) = pool(&series)?;
    let tests = poisson_tests(&counts, &gaps)?;
    Ok(ReppOutcome {
        ball,
        rescale,
        tests,
        series,
    })
}

impl ReppOutcome {
    pub fn criteria(&self) -> Vec<Criterion> {
        let t = &self.tests;
        vec![
            Criterion::new(
                "dispersion_range",
                (0.9..=1.1).contains(&t.dispersion),
                t.dispersion,
                "variance/mean in [0.9, 1.1]",
            ),
            Criterion::new(
                "dispersion_test",
                t.dispersion_pass,
                t.dispersion_p,
                "two-sided p > 0.01",
            ),
            Criterion::new(
                "counts_chi2",
                t.chi2_pass,
                t.chi2_p,
                "chi-square vs Poisson(1): p > 0.01",
            ),
            Criterion::new("gaps_ks", t.ks_pass, t.ks_p, "KS of gaps vs Exp(1): p > 0.01"),
        ]
    }

    pub fn counts_csv(&self) -> String {
        let mut s = String::from("trajectory,window,count\n");
        for (i, series) in self.series.iter().enumerate() {
            let counts = raremap_core::repp::build_repp(series).expect("validated when pooling");
            for (k, c) in counts.iter().enumerate() {
                writeln!(s, "{i},{k},{c}").unwrap();
            }
        }
        s
    }

    pub fn gaps_csv(&self) -> String {
        let mut s = String::from("trajectory,index,gap\n");
        for (i, series) in self.series.iter().enumerate() {
            for (k, g) in raremap_core::repp::interarrival_gaps(series).iter().enumerate() {
                writeln!(s, "{i},{k},{g}").unwrap();
            }
        }
        s
    }

    pub fn into_result(self) -> ScenarioResult {
        ScenarioResult {
            criteria: self.criteria(),
            artifacts: vec![
                Artifact {
                    name: "repp_counts.csv".into(),
                    contents: self.counts_csv(),
                },
                Artifact {
                    name: "repp_gaps.csv".into(),
                    contents: self.gaps_csv(),
                },
            ],
            report: serde_json::to_value(&self).expect("serializable"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DPrimeOutcome {
    pub estimates: Vec<DPrimeEstimate>,
}

pub fn run_dprime(setup: &Setup, p: &DPrimeParams) -> Result<DPrimeOutcome, RunError> {
    let obs = setup.observable(p.center)?;
    let law = setup.start_law(p.start);
    let rule = p.k_n.map_or(KnRule::SqrtN, KnRule::Fixed);
    let estimates =
        p.ns.iter()
            .map(|&n| {
                let entry = calibrate_levels(&obs, n, p.tau)?;
                dprime_statistic(
                    &setup.system,
                    &law,
                    &obs,
                    &entry,
                    rule,
                    p.trials,
                    setup.seed,
                    &setup.perturbation,
                )
            })
            .collect::<raremap_core::Result<Vec<_>>>()?;
    Ok(DPrimeOutcome { estimates })
}

impl DPrimeOutcome {
    pub fn criteria(&self) -> Vec<Criterion> {
        let mut out: Vec<Criterion> = self
            .estimates
            .iter()
            .map(|e| {
                let limit = e.bound + 3.0 * e.se;
                Criterion::new(
                    format!("dprime_bound n={}", e.n),
                    e.s_hat <= limit,
                    e.s_hat,
                    format!("S_hat <= bound + 3 SE = {limit:.6}"),
                )
            })
            .collect();
        if let (Some(first), Some(last)) = (self.estimates.first(), self.estimates.last()) {
            if self.estimates.len() >= 2 {
                out.push(Criterion::new(
                    format!("dprime_decrease n={}..{}", first.n, last.n),
                    last.s_hat < first.s_hat / 2.0,
                    last.s_hat / first.s_hat,
                    "S_hat(last n) < S_hat(first n) / 2",
                ));
            }
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("n,tau,k_n,t_n,window,s_hat,se,bound,pairs\n");
        for e in &self.estimates {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                e.n, e.tau, e.k_n, e.t_n, e.window, e.s_hat, e.se, e.bound, e.pairs
            )
            .unwrap();
        }
        s
    }

    pub fn into_result(self) -> ScenarioResult {
        ScenarioResult {
            criteria: self.criteria(),
            artifacts: vec![Artifact {
                name: "dprime.csv".into(),
                contents: self.csv(),
            }],
            report: serde_json::to_value(&self).expect("serializable"),
        }
    }
}
