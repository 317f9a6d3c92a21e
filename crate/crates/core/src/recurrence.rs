//! Hitting and return times of small balls, Kac normalization and tests of
//! the exponential hitting/return time laws.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::MarkovStep;
use crate::error::{input, Result};
use crate::extremes::TargetBall;
use crate::grid::StationaryDensity;
use crate::noise::RandomMap;
use crate::stats::{ks_statistic, mean_and_se, EmpiricalCdf, KsResult, RandomStream, StreamTag, KS_CRITICAL_5PCT};

/// Slack applied to the asymptotic 5% KS critical value.
pub const KS_SLACK: f64 = 1.5;
/// Largest censored fraction for which a run counts as valid.
pub const MAX_CENSORED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HitKind {
    /// Start drawn from the stationary law.
    Hit,
    /// Start drawn from the stationary law conditioned on the target.
    Return,
}

impl HitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HitKind::Hit => "hit",
            HitKind::Return => "return",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingSample {
    /// First `j ≥ 1` with `X_j` in the target.
    pub raw_time: u64,
    /// `raw_time · μ̂(U)`.
    pub normalized_time: f64,
    pub kind: HitKind,
}

/// Step cap `⌈10³ / μ̂(U)⌉` beyond which a sample is censored.
pub fn step_cap(mass: f64) -> u64 {
    (1e3 / mass).ceil() as u64
}

/// First `j ∈ 1..=cap` with `in_target(X_j)`, or `None` if censored.
pub fn first_entry<C, F>(chain: &C, x0: C::State, in_target: F, cap: u64, stream: &mut RandomStream) -> Option<u64>
where
    C: MarkovStep,
    F: Fn(C::State) -> bool,
{
    let mut x = x0;
    for j in 1..=cap {
        x = chain.step(x, stream);
        if in_target(x) {
            return Some(j);
        }
    }
    None
}

/// One hitting (or return) time of `ball` from `start`; `None` when censored.
pub fn hitting_sample(
    system: &RandomMap,
    ball: &TargetBall,
    start: f64,
    kind: HitKind,
    stream: &mut RandomStream,
) -> Option<HittingSample> {
    first_entry(system, start, |x| ball.contains(x), step_cap(ball.mass), stream).map(|raw_time| HittingSample {
        raw_time,
        normalized_time: raw_time as f64 * ball.mass,
        kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingRun {
    pub kind: HitKind,
    pub mass: f64,
    pub requested: u64,
    pub censored: u64,
    pub samples: Vec<HittingSample>,
}

impl HittingRun {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.requested as f64
    }

    pub fn is_valid(&self) -> bool {
        self.censored_fraction() < MAX_CENSORED_FRACTION
    }

    pub fn normalized_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.normalized_time).collect()
    }

    pub fn raw_times(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.raw_time).collect()
    }
}

/// `count` independent samples; sample `i` uses stream `(seed, tag, i)` where
/// the tag depends on `kind`. Starts are drawn from `density` (restricted to
/// the ball for returns).
pub fn sample_hitting_times(
    system: &RandomMap,
    density: &StationaryDensity,
    ball: &TargetBall,
    kind: HitKind,
    count: u64,
    seed: u64,
) -> Result<HittingRun> {
    if count == 0 {
        return input("need at least one hitting sample");
    }
    if !(ball.mass > 0.0) {
        return input("target ball has zero mass");
    }
    let tag = match kind {
        HitKind::Hit => StreamTag::Hitting,
        HitKind::Return => StreamTag::Return,
    };
    let outcomes: Vec<Option<HittingSample>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut stream = RandomStream::for_trial(seed, tag, i);
            let x0 = match kind {
                HitKind::Hit => density.sample_point(&mut stream),
                HitKind::Return => density.sample_point_in_ball(ball.center, ball.radius, &mut stream),
            };
            hitting_sample(system, ball, x0, kind, &mut stream)
        })
        .collect();
    let censored = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    Ok(HittingRun {
        kind,
        mass: ball.mass,
        requested: count,
        censored,
        samples: outcomes.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HtsReport {
    pub n: usize,
    pub ks_d: f64,
    pub ks_scaled: f64,
    pub ks_p: f64,
    /// `1.5 · 1.358 / √N`.
    pub critical: f64,
    pub pass: bool,
    pub mean: f64,
    pub mean_se: f64,
}

/// KS test of normalized times against `1 − e^{−t}`.
pub fn hts_test(normalized_times: &[f64]) -> Result<HtsReport> {
    if normalized_times.len() < 500 {
        return input(format!(
            "HTS test needs at least 500 samples, got {}",
            normalized_times.len()
        ));
    }
    let ks: KsResult = ks_statistic(normalized_times, |t| if t <= 0.0 { 0.0 } else { -(-t).exp_m1() })?;
    let critical = KS_SLACK * KS_CRITICAL_5PCT / (ks.n as f64).sqrt();
    let summary = mean_and_se(normalized_times);
    Ok(HtsReport {
        n: ks.n,
        ks_d: ks.d,
        ks_scaled: ks.scaled,
        ks_p: ks.p_value,
        critical,
        pass: ks.d < critical,
        mean: summary.mean,
        mean_se: summary.se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KacResult {
    pub n: usize,
    /// `mean(r) · μ̂(U)`.
    pub product: f64,
    pub se: f64,
}

pub fn kac_check(return_times: &[u64], mass: f64) -> Result<KacResult> {
    if return_times.len() < 500 {
        return input(format!(
            "Kac check needs at least 500 return samples, got {}",
            return_times.len()
        ));
    }
    let scaled: Vec<f64> = return_times.iter().map(|&r| r as f64 * mass).collect();
    let s = mean_and_se(&scaled);
    Ok(KacResult {
        n: return_times.len(),
        product: s.mean,
        se: s.se,
    })
}

/// `G(t) = ∫₀ᵗ (1 − G̃(s)) ds` for an empirical return-time d.f. `G̃`.
///
/// The integrand is a step function, so the integral is piecewise linear and
/// exact at every knot.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedHts {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Slope after each knot, `1 − G̃(knot)`.
    slopes: Vec<f64>,
}

pub fn hts_from_rts(rts: &EmpiricalCdf) -> ReconstructedHts {
    let xs = rts.samples();
    let n = xs.len() as f64;
    let mut knots = vec![0.0];
    let mut values = vec![0.0];
    let mut slopes = vec![1.0];
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        while i < xs.len() && xs[i] == x {
            i += 1;
        }
        if x <= 0.0 {
            *slopes.last_mut().unwrap() = 1.0 - i as f64 / n;
            continue;
        }
        let last = knots.len() - 1;
        values.push(values[last] + slopes[last] * (x - knots[last]));
        knots.push(x);
        slopes.push(1.0 - i as f64 / n);
    }
    ReconstructedHts { knots, values, slopes }
}

impl ReconstructedHts {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.knots.partition_point(|&x| x <= t) - 1;
        self.values[k] + self.slopes[k] * (t - self.knots[k])
    }

    /// `G(∞)`, the mean of the return-time samples.
    pub fn limit(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `sup_t |G(t) − F̂(t)|` against an empirical hitting-time d.f.
    pub fn sup_distance(&self, direct: &EmpiricalCdf) -> f64 {
        let xs = direct.samples();
        let n = xs.len() as f64;
        let mut d = 0.0f64;
        // F̂ is constant between its jumps and G is monotone, so the supremum
        // sits at a jump (either side) or at infinity.
        for (i, &x) in xs.iter().enumerate() {
            let g = self.eval(x);
            d = d.max((g - i as f64 / n).abs()).max((g - (i + 1) as f64 / n).abs());
        }
        d.max((self.limit() - 1.0).abs())
    }
}
