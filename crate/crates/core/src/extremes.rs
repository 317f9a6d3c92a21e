//! Extreme values of `X_n = φ(x_n)` along perturbed orbits.
//!
//! The observable is `φ(x) = g(μ̂(B_{dist(x,ζ)}(ζ)))` with `g` decreasing, so
//! the exceedance set `{φ > u}` is a ball around `ζ` and levels with
//! `n·μ̂(φ > u_n) = τ` have the closed form `u_n = g(τ/n)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{MarkovStep, StartLaw};
use crate::dynamics::PhaseSpace;
use crate::error::{input, Result};
use crate::grid::{avoidance_probability, cell_mask, GridKernel, StationaryDensity};
use crate::noise::{PerturbationReport, RandomMap};
use crate::stats::{mean_and_se, wilson_interval, RandomStream, StreamTag, WilsonInterval};

/// The decreasing function applied to ball masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GVariant {
    /// `t ↦ −log t`.
    NegLog,
    /// `t ↦ t^{−1/α}`.
    Power { alpha: f64 },
    /// `t ↦ D − t^{1/α}`.
    Bounded { alpha: f64, d: f64 },
}

impl GVariant {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            GVariant::NegLog => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    -t.ln()
                }
            }
            GVariant::Power { alpha } => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    t.powf(-1.0 / alpha)
                }
            }
            GVariant::Bounded { alpha, d } => d - t.max(0.0).powf(1.0 / alpha),
        }
    }
}

/// A ball `B_r(center)` with its stationary mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetBall {
    pub space: PhaseSpace,
    pub center: f64,
    pub radius: f64,
    pub mass: f64,
}

impl TargetBall {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.space.distance(x, self.center) < self.radius
    }

    /// Cells (of an `m`-cell grid) whose midpoints lie in the ball.
    pub fn cells(&self, m: usize) -> Vec<usize> {
        (0..m)
            .filter(|&i| self.contains(self.space.cell_midpoint(i, m)))
            .collect()
    }
}

/// `φ(x) = g(μ̂(B_{dist(x,ζ)}(ζ)))` with `μ̂` the grid stationary measure.
#[derive(Debug, Clone)]
pub struct Observable {
    center: f64,
    g: GVariant,
    density: StationaryDensity,
}

pub fn build_observable(center: f64, g: GVariant, density: &StationaryDensity) -> Result<Observable> {
    let space = density.space();
    if !space.contains(center) {
        return input(format!("observable centre {center} outside the phase space"));
    }
    if !(density.min_density() > 0.0) {
        return input("observable needs a strictly positive stationary density");
    }
    if let GVariant::Power { alpha } | GVariant::Bounded { alpha, .. } = g {
        if !(alpha > 0.0) {
            return input(format!("g exponent must be positive, got {alpha}"));
        }
    }
    Ok(Observable {
        center,
        g,
        density: density.clone(),
    })
}

impl Observable {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn g(&self) -> GVariant {
        self.g
    }

    pub fn space(&self) -> PhaseSpace {
        self.density.space()
    }

    pub fn density(&self) -> &StationaryDensity {
        &self.density
    }

    fn max_radius(&self) -> f64 {
        match self.space() {
            PhaseSpace::Circle => 0.5,
            PhaseSpace::Interval { lo, hi } => (self.center - lo).max(hi - self.center),
        }
    }

    /// Stationary mass of `B_r(ζ)`; exact for the piecewise-constant density,
    /// hence linear in `r` between cell edges.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.max_radius() && self.space().is_circle() {
            return 1.0;
        }
        self.density.interval_mass(self.center - r, self.center + r)
    }

    /// Radius whose ball carries mass `p`.
    pub fn radius_for_mass(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return input(format!("ball mass {p} outside (0, 1]"));
        }
        let (mut a, mut b) = (0.0, self.max_radius());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.radial_cdf(mid) < p {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-16 * self.space().length() {
                break;
            }
        }
        Ok(b)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.g.eval(self.radial_cdf(self.space().distance(x, self.center)))
    }

    /// The supremum `u_F = g(0)` of the observable.
    pub fn sup_value(&self) -> f64 {
        self.g.eval(0.0)
    }

    /// Exceedance set `{φ > u_n}` of a calibrated level, as a ball.
    pub fn target(&self, entry: &LevelEntry) -> TargetBall {
        TargetBall {
            space: self.space(),
            center: self.center,
            radius: entry.radius,
            mass: entry.mass,
        }
    }

    /// Cells whose midpoint value exceeds `level`.
    pub fn exceedance_cells(&self, level: f64, m: usize) -> Vec<usize> {
        let space = self.space();
        (0..m)
            .filter(|&i| self.value(space.cell_midpoint(i, m)) > level)
            .collect()
    }
}

/// One calibrated level: `n·μ̂(φ > level) = τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelEntry {
    pub n: u64,
    pub tau: f64,
    pub level: f64,
    /// Radius `δ_n` of the exceedance ball.
    pub radius: f64,
    /// Measured mass `μ̂(U_n)`.
    pub mass: f64,
}

pub fn calibrate_levels(obs: &Observable, n: u64, tau: f64) -> Result<LevelEntry> {
    if !(tau > 0.0) {
        return input(format!("tau must be positive, got {tau}"));
    }
    if n < 10 {
        return input(format!("block length must be >= 10, got {n}"));
    }
    let p = tau / n as f64;
    if p > 1.0 {
        return input(format!("tau/n = {p} exceeds the total mass"));
    }
    let radius = obs.radius_for_mass(p)?;
    Ok(LevelEntry {
        n,
        tau,
        level: obs.g.eval(p),
        radius,
        mass: obs.radial_cdf(radius),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSchedule {
    pub center: f64,
    pub g: GVariant,
    pub entries: Vec<LevelEntry>,
}

impl LevelSchedule {
    pub fn build(obs: &Observable, ns: &[u64], taus: &[f64]) -> Result<Self> {
        let mut entries = Vec::with_capacity(ns.len() * taus.len());
        for &tau in taus {
            for &n in ns {
                entries.push(calibrate_levels(obs, n, tau)?);
            }
        }
        Ok(Self {
            center: obs.center,
            g: obs.g,
            entries,
        })
    }
}

/// Estimate of `P(M_n ≤ u_n)` from independent trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvlEstimate {
    pub tau: f64,
    pub n: u64,
    pub trials: u64,
    pub survivors: u64,
    pub p_hat: f64,
    pub interval: WilsonInterval,
    /// `exp(−τ)`.
    pub target: f64,
}

impl EvlEstimate {
    /// Binomial standard deviation of `p_hat` under the target law.
    pub fn target_sigma(&self) -> f64 {
        (self.target * (1.0 - self.target) / self.trials as f64).sqrt()
    }
}

/// Number of trials (out of `trials`) whose first `n` states avoid the
/// exceedance set. Trial `t` uses stream `(seed, tag, t)`.
#[allow(clippy::too_many_arguments)]
pub fn count_block_survivors<C, S, E>(
    chain: &C,
    start: S,
    exceeds: E,
    n: u64,
    trials: u64,
    seed: u64,
    tag: StreamTag,
) -> u64
where
    C: MarkovStep,
    S: Fn(&mut RandomStream) -> C::State + Sync,
    E: Fn(C::State) -> bool + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = RandomStream::for_trial(seed, tag, t);
            let mut x = start(&mut stream);
            for j in 0..n {
                if exceeds(x) {
                    return 0u64;
                }
                if j + 1 < n {
                    x = chain.step(x, &mut stream);
                }
            }
            1
        })
        .sum()
}

pub fn evl_estimate(
    system: &RandomMap,
    law: &StartLaw<'_>,
    obs: &Observable,
    entry: &LevelEntry,
    trials: u64,
    seed: u64,
) -> Result<EvlEstimate> {
    if trials < 100 {
        return input(format!("EVL estimate needs at least 100 trials, got {trials}"));
    }
    let ball = obs.target(entry);
    let survivors = count_block_survivors(
        system,
        |s| law.draw(system, s),
        |x| ball.contains(x),
        entry.n,
        trials,
        seed,
        StreamTag::Evl,
    );
    let interval = wilson_interval(survivors, trials);
    Ok(EvlEstimate {
        tau: entry.tau,
        n: entry.n,
        trials,
        survivors,
        p_hat: interval.p_hat,
        interval,
        target: (-entry.tau).exp(),
    })
}

/// Choice of the block-count sequence `k_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KnRule {
    /// `k_n = ⌈√n⌉`.
    SqrtN,
    Fixed(u64),
}

impl KnRule {
    pub fn k(&self, n: u64) -> u64 {
        match *self {
            KnRule::SqrtN => (n as f64).sqrt().ceil() as u64,
            KnRule::Fixed(k) => k,
        }
    }
}

/// `t_n = ⌈log n⌉`, the gap paired with `k_n`.
pub fn time_gap(n: u64) -> u64 {
    (n as f64).ln().ceil() as u64
}

pub const DPRIME_BLOCKS: usize = 100;

/// Anti-clustering statistic `n Σ_{j=1}^{⌊n/k_n⌋} P(X_0 > u_n, X_j > u_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DPrimeEstimate {
    pub n: u64,
    pub tau: f64,
    pub k_n: u64,
    pub t_n: u64,
    pub window: u64,
    pub s_hat: f64,
    /// Standard error from the spread of the block estimates.
    pub se: f64,
    pub blocks: usize,
    pub pairs: u64,
    /// `(q̄ / h̲)·(n·μ̂(U_n))² / k_n`.
    pub bound: f64,
}

/// Exceedance pairs at lags `1..=window` along one trajectory of `len` states.
/// `counts[j - 1]` is the number of pairs at lag `j`.
pub fn lagged_pair_counts<C, E>(
    chain: &C,
    x0: C::State,
    exceeds: E,
    len: u64,
    window: usize,
    stream: &mut RandomStream,
) -> Vec<u64>
where
    C: MarkovStep,
    E: Fn(C::State) -> bool,
{
    let mut counts = vec![0u64; window];
    let mut recent: std::collections::VecDeque<u64> = std::collections::VecDeque::new();
    let mut x = x0;
    for i in 0..len {
        if exceeds(x) {
            while let Some(&front) = recent.front() {
                if i - front > window as u64 {
                    recent.pop_front();
                } else {
                    break;
                }
            }
            for &prev in &recent {
                counts[(i - prev - 1) as usize] += 1;
            }
            recent.push_back(i);
        }
        if i + 1 < len {
            x = chain.step(x, stream);
        }
    }
    counts
}

/// Turn per-lag pair counts over a series of `len` states into
/// `n Σ_j P̂(X_0 > u, X_j > u)`.
pub fn pair_statistic(counts: &[u64], len: u64, n: u64) -> f64 {
    n as f64
        * counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 / (len - k as u64 - 1) as f64)
            .sum::<f64>()
}

/// Monte Carlo estimate of the anti-clustering statistic over `n·trials`
/// states, split into [`DPRIME_BLOCKS`] independent stationary blocks.
#[allow(clippy::too_many_arguments)]
pub fn dprime_statistic(
    system: &RandomMap,
    law: &StartLaw<'_>,
    obs: &Observable,
    entry: &LevelEntry,
    rule: KnRule,
    trials: u64,
    seed: u64,
    perturbation: &PerturbationReport,
) -> Result<DPrimeEstimate> {
    let n = entry.n;
    let k_n = rule.k(n);
    if k_n == 0 {
        return input("k_n must be positive");
    }
    let window = n / k_n;
    let total = n * trials;
    let block_len = total.div_ceil(DPRIME_BLOCKS as u64);
    if window == 0 || block_len <= 2 * window {
        return input("blocks are too short for the lag window; raise the trial count");
    }
    let ball = obs.target(entry);
    let per_block: Vec<(f64, u64)> = (0..DPRIME_BLOCKS as u64)
        .into_par_iter()
        .map(|b| {
            let mut stream = RandomStream::for_trial(seed, StreamTag::DPrime, b);
            let x0 = law.draw(system, &mut stream);
            let counts = lagged_pair_counts(
                system,
                x0,
                |x| ball.contains(x),
                block_len,
                window as usize,
                &mut stream,
            );
            (pair_statistic(&counts, block_len, n), counts.iter().sum())
        })
        .collect();
    let values: Vec<f64> = per_block.iter().map(|v| v.0).collect();
    let summary = mean_and_se(&values);
    let min_h = obs.density().min_density();
    let nm = n as f64 * entry.mass;
    Ok(DPrimeEstimate {
        n,
        tau: entry.tau,
        k_n,
        t_n: time_gap(n),
        window,
        s_hat: summary.mean,
        se: summary.se,
        blocks: DPRIME_BLOCKS,
        pairs: per_block.iter().map(|v| v.1).sum(),
        bound: perturbation.upper_q / min_h * nm * nm / k_n as f64,
    })
}

/// Exact mixing gap
/// `|P(X_0 ∈ U, X_t..X_{t+ℓ−1} ∉ U) − P(X_0 ∈ U)·P(X_0..X_{ℓ−1} ∉ U)|`
/// for the grid chain and the cell set `target`.
pub fn d2_gap(kernel: &GridKernel, density: &StationaryDensity, target: &[usize], t: usize, ell: usize) -> Result<f64> {
    if t == 0 {
        return input("d2 gap needs t >= 1");
    }
    if ell == 0 {
        return Ok(0.0);
    }
    let mask = cell_mask(kernel.m(), target)?;
    let pi = density.probabilities();
    let start: Vec<f64> = pi.iter().zip(&mask).map(|(p, &u)| if u { *p } else { 0.0 }).collect();
    let mass: f64 = start.iter().sum();
    let mut window = vec![false; t + ell];
    window[t..].iter_mut().for_each(|w| *w = true);
    let joint = avoidance_probability(kernel, &start, &mask, &window)?;
    let survive = avoidance_probability(kernel, pi, &mask, &vec![true; ell])?;
    Ok((joint - mass * survive).abs())
}
