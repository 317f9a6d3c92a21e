//! Rare event point process: exceedance times rescaled by `v = 1/μ̂(U)`,
//! counted in unit windows and tested against a standard Poisson process.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chain::StartLaw;
use crate::error::{input, Result};
use crate::extremes::TargetBall;
use crate::grid::{avoidance_probability, cell_mask, GridKernel, StationaryDensity};
use crate::noise::RandomMap;
use crate::stats::{chi2_gof, ks_statistic, poisson_histogram, Chi2Result, RandomStream, StreamTag};

pub const MIN_WINDOWS: usize = 200;
pub const MIN_GAPS: usize = 500;
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceSeries {
    times: Vec<u64>,
    rescale: f64,
    horizon: u64,
}

impl ExceedanceSeries {
    pub fn new(times: Vec<u64>, rescale: f64, horizon: u64) -> Result<Self> {
        if !(rescale > 1.0) {
            return input(format!("rescale factor must exceed 1, got {rescale}"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return input("exceedance times must be strictly increasing");
        }
        if times.last().is_some_and(|&t| t >= horizon) {
            return input("exceedance time beyond the horizon");
        }
        Ok(Self {
            times,
            rescale,
            horizon,
        })
    }

    /// Exceedances `X_j > level` of an observable series.
    pub fn from_observables(values: &[f64], level: f64, rescale: f64) -> Result<Self> {
        let times = values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > level)
            .map(|(j, _)| j as u64)
            .collect();
        Self::new(times, rescale, values.len() as u64)
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Number of complete unit windows `[k, k+1)` in rescaled time.
    pub fn windows(&self) -> usize {
        (self.horizon as f64 / self.rescale).floor() as usize
    }

    /// Number of exceedances in the half-open step range `[a, b)`.
    pub fn count_in(&self, a: u64, b: u64) -> usize {
        self.times.partition_point(|&t| t < b) - self.times.partition_point(|&t| t < a)
    }
}

/// Counts in consecutive unit windows from time 0: window `k` holds the
/// steps `j` with `k·v ≤ j < (k+1)·v`.
pub fn build_repp(series: &ExceedanceSeries) -> Result<Vec<u64>> {
    let windows = series.windows();
    if windows < MIN_WINDOWS {
        return input(format!("horizon covers {windows} windows, need at least {MIN_WINDOWS}"));
    }
    let mut counts = vec![0u64; windows];
    for &t in &series.times {
        let k = (t as f64 / series.rescale).floor() as usize;
        if k < windows {
            counts[k] += 1;
        }
    }
    Ok(counts)
}

/// Rescaled gaps between consecutive exceedances.
pub fn interarrival_gaps(series: &ExceedanceSeries) -> Vec<f64> {
    series
        .times
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 / series.rescale)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonTests {
    pub windows: usize,
    pub gaps: usize,
    pub mean_count: f64,
    /// Variance over mean of the window counts.
    pub dispersion: f64,
    /// Two-sided p-value of `(W − 1)·dispersion` against `χ²_{W−1}`.
    pub dispersion_p: f64,
    pub dispersion_pass: bool,
    pub chi2_statistic: f64,
    pub chi2_dof: usize,
    pub chi2_p: f64,
    pub chi2_pass: bool,
    pub ks_d: f64,
    pub ks_p: f64,
    pub ks_pass: bool,
}

impl PoissonTests {
    pub fn pass(&self) -> bool {
        self.dispersion_pass && self.chi2_pass && self.ks_pass
    }
}

pub fn poisson_tests(counts: &[u64], gaps: &[f64]) -> Result<PoissonTests> {
    if counts.len() < MIN_WINDOWS {
        return input(format!("{} windows, need at least {MIN_WINDOWS}", counts.len()));
    }
    if gaps.len() < MIN_GAPS {
        return input(format!("{} gaps, need at least {MIN_GAPS}", gaps.len()));
    }
    let w = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / w;
    if mean <= 0.0 {
        return input("no exceedances in any window");
    }
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (w - 1.0);
    let dispersion = var / mean;
    let chi = ChiSquared::new(w - 1.0).map_err(|e| crate::Error::Input(e.to_string()))?;
    let stat = (w - 1.0) * dispersion;
    let dispersion_p = (2.0 * chi.cdf(stat).min(chi.sf(stat))).min(1.0);
    let (observed, pmf) = poisson_histogram(counts, 1.0);
    let chi2: Chi2Result = chi2_gof(&observed, &pmf)?;
    let ks = ks_statistic(gaps, |t| if t <= 0.0 { 0.0 } else { -(-t).exp_m1() })?;
    Ok(PoissonTests {
        windows: counts.len(),
        gaps: gaps.len(),
        mean_count: mean,
        dispersion,
        dispersion_p,
        dispersion_pass: dispersion_p > SIGNIFICANCE,
        chi2_statistic: chi2.statistic,
        chi2_dof: chi2.dof,
        chi2_p: chi2.p_value,
        chi2_pass: chi2.passes(SIGNIFICANCE),
        ks_d: ks.d,
        ks_p: ks.p_value,
        ks_pass: ks.passes(SIGNIFICANCE),
    })
}

/// Exceedance series of `trajectories` independent orbits of `horizon`
/// states each; orbit `i` uses stream `(seed, Repp, i)`.
pub fn simulate_exceedances(
    system: &RandomMap,
    law: &StartLaw<'_>,
    ball: &TargetBall,
    horizon: u64,
    trajectories: u64,
    seed: u64,
) -> Result<Vec<ExceedanceSeries>> {
    let rescale = 1.0 / ball.mass;
    (0..trajectories)
        .into_par_iter()
        .map(|i| {
            let mut stream = RandomStream::for_trial(seed, StreamTag::Repp, i);
            let mut x = law.draw(system, &mut stream);
            let mut times = Vec::new();
            for j in 0..horizon {
                if ball.contains(x) {
                    times.push(j);
                }
                if j + 1 < horizon {
                    x = system.sample_step(x, &mut stream);
                }
            }
            ExceedanceSeries::new(times, rescale, horizon)
        })
        .collect()
}

/// Window counts and gaps of several series, concatenated in order.
pub fn pool(series: &[ExceedanceSeries]) -> Result<(Vec<u64>, Vec<f64>)> {
    let mut counts = Vec::new();
    let mut gaps = Vec::new();
    for s in series {
        counts.extend(build_repp(s)?);
        gaps.extend(interarrival_gaps(s));
    }
    Ok((counts, gaps))
}

/// Exact gap `|P(X_0 ∈ U, N(A + t) = 0) − P(X_0 ∈ U)·P(N(A) = 0)|` on the grid
/// chain, for `A` a union of step intervals `[a, b)`.
pub fn d3_gap(
    kernel: &GridKernel,
    density: &StationaryDensity,
    target: &[usize],
    intervals: &[(usize, usize)],
    t: usize,
) -> Result<f64> {
    if intervals.iter().any(|&(a, b)| a >= b) {
        return input("intervals must be non-empty [a, b) ranges");
    }
    let end = intervals.iter().map(|&(_, b)| b).max().unwrap_or(0);
    if end == 0 {
        return Ok(0.0);
    }
    let mut pattern = vec![false; end];
    for &(a, b) in intervals {
        pattern[a..b].iter_mut().for_each(|p| *p = true);
    }
    let mut shifted = vec![false; t + end];
    shifted[t..].copy_from_slice(&pattern);
    let mask = cell_mask(kernel.m(), target)?;
    let pi = density.probabilities();
    let start: Vec<f64> = pi.iter().zip(&mask).map(|(p, &u)| if u { *p } else { 0.0 }).collect();
    let mass: f64 = start.iter().sum();
    let joint = avoidance_probability(kernel, &start, &mask, &shifted)?;
    let free = avoidance_probability(kernel, pi, &mask, &pattern)?;
    Ok((joint - mass * free).abs())
}
