//! Exact avoidance probabilities on the grid chain.
//!
//! With `Q` the kernel restricted to the complement of a target set `U`,
//! `π_{Uᶜ} Q^{ℓ−1} 1` is the probability that the stationary chain avoids `U`
//! at times `0..ℓ`. These are the exact counterparts of the Monte Carlo
//! estimates of block maxima and hitting times.

use ndarray::Array1;

use crate::error::{input, Result};
use crate::grid::{GridKernel, StationaryDensity};

/// Boolean membership mask for a list of cells.
pub fn cell_mask(m: usize, cells: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; m];
    for &c in cells {
        if c >= m {
            return input(format!("cell {c} out of range for a {m}-cell grid"));
        }
        mask[c] = true;
    }
    Ok(mask)
}

fn zero_masked(v: &mut Array1<f64>, mask: &[bool]) {
    for (x, &inside) in v.iter_mut().zip(mask) {
        if inside {
            *x = 0.0;
        }
    }
}

/// Survival and first-hitting distributions of a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct TabooSurvival {
    /// `survival[ℓ] = P(X_0, …, X_{ℓ−1} ∉ U)`, with `survival[0] = 1`.
    /// Equivalently `P(M_ℓ ≤ u)` and, by stationarity, `P(r_U > ℓ)`.
    pub survival: Vec<f64>,
    /// `hitting[ℓ] = P(r_U = ℓ)` for `r_U = min{j ≥ 1 : X_j ∈ U}`; `hitting[0] = 0`.
    pub hitting: Vec<f64>,
}

pub fn taboo_survival(
    kernel: &GridKernel,
    stationary: &StationaryDensity,
    target: &[usize],
    horizon: usize,
) -> Result<TabooSurvival> {
    if target.is_empty() {
        return input("target set must be non-empty");
    }
    let mask = cell_mask(kernel.m(), target)?;
    let mut v = Array1::from(stationary.probabilities().to_vec());
    zero_masked(&mut v, &mask);
    let mut survival = Vec::with_capacity(horizon + 1);
    survival.push(1.0);
    for l in 1..=horizon {
        if l > 1 {
            v = kernel.push_forward(&v);
            zero_masked(&mut v, &mask);
        }
        survival.push(v.sum().clamp(0.0, 1.0));
    }
    let mut hitting = vec![0.0; horizon + 1];
    for l in 1..=horizon {
        hitting[l] = (survival[l - 1] - survival[l]).max(0.0);
    }
    Ok(TabooSurvival { survival, hitting })
}

/// `P(r_U > ℓ | X_0 ~ π restricted to U)` for `ℓ = 0..=horizon`.
pub fn return_time_survival(
    kernel: &GridKernel,
    stationary: &StationaryDensity,
    target: &[usize],
    horizon: usize,
) -> Result<Vec<f64>> {
    let (mut v, _) = return_start(kernel, stationary, target)?;
    let mask = cell_mask(kernel.m(), target)?;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(1.0);
    for _ in 1..=horizon {
        v = kernel.push_forward(&v);
        zero_masked(&mut v, &mask);
        out.push(v.sum().clamp(0.0, 1.0));
    }
    Ok(out)
}

fn return_start(kernel: &GridKernel, stationary: &StationaryDensity, target: &[usize]) -> Result<(Array1<f64>, f64)> {
    if target.is_empty() {
        return input("target set must be non-empty");
    }
    let mask = cell_mask(kernel.m(), target)?;
    let pi = stationary.probabilities();
    let mass: f64 = pi.iter().zip(&mask).filter(|(_, &u)| u).map(|(p, _)| p).sum();
    if mass <= 0.0 {
        return input("target set has zero stationary mass");
    }
    let v = Array1::from_iter(pi.iter().zip(&mask).map(|(p, &u)| if u { p / mass } else { 0.0 }));
    Ok((v, mass))
}

/// `E_U[r_U]·π(U)` from the exact return-time distribution; Kac's lemma says 1.
///
/// Sums `P(r > ℓ)` until the terms fall below `1e-17` of the running total
/// and adds a geometric estimate of the remainder.
pub fn kac_product(kernel: &GridKernel, stationary: &StationaryDensity, target: &[usize]) -> Result<f64> {
    let (mut v, mass) = return_start(kernel, stationary, target)?;
    let mask = cell_mask(kernel.m(), target)?;
    let mut expected = 1.0; // P(r > 0)
    let mut previous = 1.0;
    for _ in 0..50_000_000usize {
        v = kernel.push_forward(&v);
        zero_masked(&mut v, &mask);
        let term = v.sum();
        expected += term;
        if term <= 1e-17 * expected {
            let ratio = if previous > 0.0 { term / previous } else { 0.0 };
            if ratio < 1.0 {
                expected += term * ratio / (1.0 - ratio);
            }
            break;
        }
        previous = term;
    }
    Ok(expected * mass)
}

/// Probability that the chain started from the (sub-)distribution `start`
/// avoids the masked cells at every time `s` with `forbidden[s]`.
pub fn avoidance_probability(kernel: &GridKernel, start: &[f64], mask: &[bool], forbidden: &[bool]) -> Result<f64> {
    let m = kernel.m();
    if start.len() != m || mask.len() != m {
        return input("start vector and mask must have one entry per cell");
    }
    let mut v = Array1::from(start.to_vec());
    for (s, &avoid) in forbidden.iter().enumerate() {
        if s > 0 {
            v = kernel.push_forward(&v);
        }
        if avoid {
            zero_masked(&mut v, mask);
        }
    }
    Ok(v.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::grid::{discretize, stationary, DEFAULT_TOL};
    use crate::noise::{Boundary, NoiseSpec, RandomMap};
    use approx::assert_abs_diff_eq;

    fn doubling_grid(m: usize) -> (GridKernel, StationaryDensity) {
        let sys = RandomMap::new(
            MapSpec::doubling(2).unwrap(),
            NoiseSpec::uniform(0.25, Boundary::Wrap).unwrap(),
        )
        .unwrap();
        let k = discretize(&sys, m).unwrap();
        let s = stationary(&k, DEFAULT_TOL).unwrap();
        (k, s)
    }

    fn quadratic_grid(m: usize) -> (GridKernel, StationaryDensity) {
        let sys = RandomMap::new(
            MapSpec::quadratic(2.0).unwrap(),
            NoiseSpec::uniform(0.1, Boundary::Reflect).unwrap(),
        )
        .unwrap();
        let k = discretize(&sys, m).unwrap();
        let s = stationary(&k, 1e-14).unwrap();
        (k, s)
    }

    /// Brute-force enumeration of all cell paths of length `len` (tiny grids only).
    fn enumerate_avoidance(k: &GridKernel, pi: &[f64], target: &[bool], len: usize) -> f64 {
        fn rec(k: &GridKernel, target: &[bool], cell: usize, left: usize) -> f64 {
            if target[cell] {
                return 0.0;
            }
            if left == 0 {
                return 1.0;
            }
            (0..k.m())
                .map(|j| k.matrix()[[cell, j]] * rec(k, target, j, left - 1))
                .sum()
        }
        (0..k.m()).map(|i| pi[i] * rec(k, target, i, len - 1)).sum()
    }

    #[test]
    fn matches_path_enumeration() {
        let sys = RandomMap::new(
            MapSpec::quadratic(2.0).unwrap(),
            NoiseSpec::uniform(0.7, Boundary::Reflect).unwrap(),
        )
        .unwrap();
        let k = discretize(&sys, 16).unwrap();
        let s = stationary(&k, 1e-14).unwrap();
        let target = [3usize, 4];
        let mask = cell_mask(16, &target).unwrap();
        let t = taboo_survival(&k, &s, &target, 4).unwrap();
        for l in 1..=4 {
            let brute = enumerate_avoidance(&k, s.probabilities(), &mask, l);
            assert_abs_diff_eq!(t.survival[l], brute, epsilon = 1e-13);
        }
    }

    #[test]
    fn survival_is_monotone_and_hitting_sums_up() {
        let (k, s) = quadratic_grid(128);
        let t = taboo_survival(&k, &s, &[60, 61, 62], 2000).unwrap();
        assert_eq!(t.survival[0], 1.0);
        assert!(t.survival.windows(2).all(|w| w[1] <= w[0] && w[1] >= 0.0));
        let total: f64 = t.hitting.iter().sum();
        assert_abs_diff_eq!(total + t.survival[2000], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn whole_space_is_hit_immediately() {
        let (k, s) = doubling_grid(32);
        let all: Vec<usize> = (0..32).collect();
        let t = taboo_survival(&k, &s, &all, 5).unwrap();
        assert_eq!(t.hitting[1], 1.0);
        assert!(t.survival[1..].iter().all(|v| *v == 0.0));
        assert_abs_diff_eq!(kac_product(&k, &s, &all).unwrap(), 1.0, epsilon = 1e-15);
        assert!(taboo_survival(&k, &s, &[], 5).is_err());
    }

    #[test]
    fn doubling_survival_is_exponential() {
        // μ(U) = 2^-7: four cells of a 512-cell grid
        let (k, s) = doubling_grid(512);
        let target: Vec<usize> = (100..104).collect();
        let mu: f64 = target.iter().map(|&c| s.probabilities()[c]).sum();
        assert_abs_diff_eq!(mu, 1.0 / 128.0, epsilon = 1e-9);
        let t = taboo_survival(&k, &s, &target, 300).unwrap();
        for tt in [0.5, 1.0, 2.0] {
            let l = (tt / mu).floor() as usize;
            assert!((t.survival[l] - (-tt).exp()).abs() < 0.02, "t = {tt}");
        }
    }

    #[test]
    fn kac_holds_on_the_grid() {
        let (k, s) = doubling_grid(256);
        let target: Vec<usize> = (10..14).collect();
        assert_abs_diff_eq!(kac_product(&k, &s, &target).unwrap(), 1.0, epsilon = 1e-6);
        let (q, sq) = quadratic_grid(128);
        assert_abs_diff_eq!(kac_product(&q, &sq, &[70, 71]).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn return_survival_starts_at_one() {
        let (k, s) = doubling_grid(64);
        let r = return_time_survival(&k, &s, &[5, 6], 100).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn avoidance_reduces_to_survival() {
        let (k, s) = quadratic_grid(64);
        let target = [30usize, 31];
        let mask = cell_mask(64, &target).unwrap();
        let t = taboo_survival(&k, &s, &target, 10).unwrap();
        let p = avoidance_probability(&k, s.probabilities(), &mask, &[true; 10]).unwrap();
        assert_abs_diff_eq!(p, t.survival[10], epsilon = 1e-14);
    }
}
