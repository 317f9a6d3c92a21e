use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::error::{input, Result};
use crate::grid::{GridKernel, StationaryDensity};
use crate::noise::PerturbationReport;
use crate::stats::linear_fit;

/// Values at or below this are treated as numerically zero in rate fits.
pub const TV_FLOOR: f64 = 1e-14;

/// `d(n) = max_i ½ Σ_j |Pⁿ[i][j] − π_j|` for `n = 1..=n_max`.
pub fn tv_profile(kernel: &GridKernel, stationary: &StationaryDensity, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 2 {
        return input("total-variation profile needs n_max >= 2");
    }
    let pi = Array1::from(stationary.probabilities().to_vec());
    let mut pn = kernel.matrix().clone();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            pn = pn.dot(kernel.matrix());
        }
        let worst = pn
            .axis_iter(Axis(0))
            .map(|row| 0.5 * (&row - &pi).mapv(f64::abs).sum())
            .fold(0.0, f64::max);
        out.push(worst);
    }
    Ok(out)
}

/// Outcome of fitting `d(n) ≈ C·λ⁻ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GeometricRate {
    Fitted {
        c: f64,
        lambda: f64,
        r_squared: f64,
        points: usize,
    },
    /// Fewer than five profile values lie above [`TV_FLOOR`]: the profile hit
    /// zero before a rate could be measured.
    Converged { points_above_floor: usize },
}

impl GeometricRate {
    /// A fit with `r² ≥ 0.99`.
    pub fn is_geometric(&self) -> bool {
        matches!(self, GeometricRate::Fitted { r_squared, .. } if *r_squared >= 0.99)
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            GeometricRate::Fitted { lambda, .. } => Some(*lambda),
            GeometricRate::Converged { .. } => None,
        }
    }
}

/// Least-squares fit of `log d(n) = log C − n log λ` over values above the floor.
///
/// `profile[k]` is `d(k + 1)`.
pub fn fit_geometric_rate(profile: &[f64]) -> Result<GeometricRate> {
    let (x, y): (Vec<f64>, Vec<f64>) = profile
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > TV_FLOOR)
        .map(|(k, d)| ((k + 1) as f64, d.ln()))
        .unzip();
    if x.len() < 5 {
        return Ok(GeometricRate::Converged {
            points_above_floor: x.len(),
        });
    }
    let fit = linear_fit(&x, &y)?;
    Ok(GeometricRate::Fitted {
        c: fit.intercept.exp(),
        lambda: (-fit.slope).exp(),
        r_squared: fit.r_squared,
        points: x.len(),
    })
}

/// Worst-case `k`-step mass on unions of at least `⌈γm⌉` cells:
/// the minimum over rows of `Pᵏ` of the sum of its `⌈γm⌉` smallest entries.
pub fn doeblin_margin(kernel: &GridKernel, gamma: f64, k: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return input(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    if k == 0 {
        return input("Doeblin step count must be >= 1");
    }
    let pk = kernel.power(k);
    let take = (gamma * kernel.m() as f64).ceil() as usize;
    let margin = pk
        .axis_iter(Axis(0))
        .map(|row| {
            let mut v = row.to_vec();
            v.sort_by(|a, b| a.total_cmp(b));
            v[..take].iter().sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(margin)
}

/// Constructive lower bounds for the one-step Doeblin constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoeblinBounds {
    /// `q̲·γ/2`.
    pub half_gamma: f64,
    /// `q̲·(γ·L + 2ρ₀ − L)⁺`: any set of normalized measure `γ` meets the
    /// `ρ₀`-ball around `f(x)` in at least that much length.
    pub ball_overlap: f64,
}

pub fn constructive_doeblin_bounds(report: &PerturbationReport, gamma: f64, domain_length: f64) -> DoeblinBounds {
    let ball = (2.0 * report.rho0).min(domain_length);
    DoeblinBounds {
        half_gamma: report.lower_q * gamma / 2.0,
        ball_overlap: report.lower_q * (gamma * domain_length + ball - domain_length).max(0.0),
    }
}

/// `min_{i∈A, j∈B} P[i][j] / cell width`: the Harris minorization constant
/// against normalized Lebesgue measure on `B`.
pub fn harris_minorization(kernel: &GridKernel, a_cells: &[usize], b_cells: &[usize]) -> Result<f64> {
    if a_cells.is_empty() || b_cells.is_empty() {
        return input("Harris minorization needs non-empty cell sets");
    }
    let m = kernel.m();
    if a_cells.iter().chain(b_cells).any(|&c| c >= m) {
        return input("cell index out of range");
    }
    let p = kernel.matrix();
    let w = kernel.cell_width();
    Ok(a_cells
        .iter()
        .flat_map(|&i| b_cells.iter().map(move |&j| p[[i, j]] / w))
        .fold(f64::INFINITY, f64::min))
}

/// Smallest `k ≤ k_max` with `Pᵏ` entrywise positive, by boolean powering.
pub fn aperiodicity_index(kernel: &GridKernel, k_max: usize) -> Option<usize> {
    let m = kernel.m();
    let words = m.div_ceil(64);
    let base: Vec<Vec<u64>> = kernel
        .matrix()
        .axis_iter(Axis(0))
        .map(|row| {
            let mut bits = vec![0u64; words];
            for (j, p) in row.iter().enumerate() {
                if *p > 0.0 {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let full = |bits: &[u64]| (0..m).all(|j| bits[j / 64] >> (j % 64) & 1 == 1);
    let mut reach = base.clone();
    for k in 1..=k_max {
        if reach.iter().all(|r| full(r)) {
            return Some(k);
        }
        if k == k_max {
            break;
        }
        reach = reach
            .iter()
            .map(|row| {
                let mut next = vec![0u64; words];
                for j in 0..m {
                    if row[j / 64] >> (j % 64) & 1 == 1 {
                        for (n, b) in next.iter_mut().zip(&base[j]) {
                            *n |= b;
                        }
                    }
                }
                next
            })
            .collect();
    }
    None
}

/// Annealed correlation of cell functions after `n` steps, normalized by
/// `‖φ‖_{L¹(π)}·‖ψ‖_∞`.
pub fn correlation(
    kernel: &GridKernel,
    stationary: &StationaryDensity,
    phi: &[f64],
    psi: &[f64],
    n: usize,
) -> Result<f64> {
    let m = kernel.m();
    if phi.len() != m || psi.len() != m {
        return input("observables must have one value per cell");
    }
    let pi = stationary.probabilities();
    let phi_l1: f64 = pi.iter().zip(phi).map(|(p, f)| p * f.abs()).sum();
    let psi_sup = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if phi_l1 == 0.0 || psi_sup == 0.0 {
        return input("correlation needs observables with non-zero norm");
    }
    let mut evolved = Array1::from(psi.to_vec());
    for _ in 0..n {
        evolved = kernel.pull_back(&evolved);
    }
    let joint: f64 = (0..m).map(|i| pi[i] * phi[i] * evolved[i]).sum();
    let mean_phi: f64 = pi.iter().zip(phi).map(|(p, f)| p * f).sum();
    let mean_psi: f64 = pi.iter().zip(psi).map(|(p, f)| p * f).sum();
    Ok((joint - mean_phi * mean_psi).abs() / (phi_l1 * psi_sup))
}

/// Lower bounds on the stationary density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_density: f64,
    /// Smallest `k` with `Pᵏ` entrywise positive (`N`).
    pub primitivity_index: Option<usize>,
    /// `max_{1≤k≤2N} min_{i,j} Pᵏ[i][j] / cell width`; valid because `π = π·Pᵏ`.
    pub covering_bound: f64,
    /// `μ(B_{ρ₀/2}(z*))·inf{q̲ᵏ : 0 ≤ k ≤ 2N}` with `z*` the heaviest ball centre.
    pub ball_bound_lower_q: f64,
    /// Same with `q̄ᵏ` in the infimum.
    pub ball_bound_upper_q: f64,
}

pub fn positivity_report(
    kernel: &GridKernel,
    stationary: &StationaryDensity,
    perturbation: &PerturbationReport,
    k_max: usize,
) -> PositivityReport {
    let min_density = stationary.min_density();
    let w = kernel.cell_width();
    let n = aperiodicity_index(kernel, k_max);
    let mut covering_bound = 0.0f64;
    if let Some(n) = n {
        let mut pk: Array2<f64> = kernel.matrix().clone();
        for k in 1..=2 * n {
            if k > 1 {
                pk = pk.dot(kernel.matrix());
            }
            let floor = pk.iter().copied().fold(f64::INFINITY, f64::min) / w;
            covering_bound = covering_bound.max(floor);
        }
    }
    let half = 0.5 * perturbation.rho0;
    let heaviest = (0..kernel.m())
        .map(|i| {
            let z = kernel.midpoint(i);
            stationary.interval_mass(z - half, z + half)
        })
        .fold(0.0, f64::max);
    let inf_power = |q: f64, top: usize| (0..=top).map(|k| q.powi(k as i32)).fold(f64::INFINITY, f64::min);
    let top = 2 * n.unwrap_or(k_max);
    PositivityReport {
        min_density,
        primitivity_index: n,
        covering_bound,
        ball_bound_lower_q: heaviest * inf_power(perturbation.lower_q, top),
        ball_bound_upper_q: heaviest * inf_power(perturbation.upper_q, top),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{MapSpec, PhaseSpace};
    use crate::grid::{discretize, stationary, DEFAULT_TOL};
    use crate::noise::{Boundary, NoiseSpec, RandomMap};
    use approx::assert_abs_diff_eq;

    fn doubling(eps: f64) -> RandomMap {
        RandomMap::new(
            MapSpec::doubling(2).unwrap(),
            NoiseSpec::uniform(eps, Boundary::Wrap).unwrap(),
        )
        .unwrap()
    }

    fn quadratic(eps: f64) -> RandomMap {
        RandomMap::new(
            MapSpec::quadratic(2.0).unwrap(),
            NoiseSpec::uniform(eps, Boundary::Reflect).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn full_support_profile_and_margins() {
        let k = discretize(&doubling(0.5), 64).unwrap();
        let s = stationary(&k, DEFAULT_TOL).unwrap();
        let d = tv_profile(&k, &s, 5).unwrap();
        assert!(d[0] < 1e-15);
        for gamma in [0.1, 0.5, 0.9] {
            let expected = (gamma * 64.0f64).ceil() / 64.0;
            assert_abs_diff_eq!(doeblin_margin(&k, gamma, 1).unwrap(), expected, epsilon = 1e-12);
        }
        assert_eq!(aperiodicity_index(&k, 5), Some(1));
        let all: Vec<usize> = (0..64).collect();
        assert_abs_diff_eq!(harris_minorization(&k, &all, &all).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn doubling_profile_contracts_and_vanishes() {
        let k = discretize(&doubling(0.25), 512).unwrap();
        let s = stationary(&k, DEFAULT_TOL).unwrap();
        let d = tv_profile(&k, &s, 10).unwrap();
        for w in d.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(d.iter().all(|v| (0.0..=1.0).contains(v)));
        // two noisy doubling steps with ε = 1/4 already produce the uniform law
        assert!(d[1] < TV_FLOOR);
        assert!(matches!(
            fit_geometric_rate(&d).unwrap(),
            GeometricRate::Converged { .. }
        ));
    }

    #[test]
    fn fit_examples() {
        let geometric: Vec<f64> = (1..=30).map(|n| 0.8f64.powi(n)).collect();
        match fit_geometric_rate(&geometric).unwrap() {
            GeometricRate::Fitted {
                c, lambda, r_squared, ..
            } => {
                assert_abs_diff_eq!(lambda, 1.25, epsilon = 1e-10);
                assert_abs_diff_eq!(c, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(r_squared, 1.0, epsilon = 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let harmonic: Vec<f64> = (1..=30).map(|n| 1.0 / n as f64).collect();
        let fit = fit_geometric_rate(&harmonic).unwrap();
        assert!(!fit.is_geometric(), "{fit:?}");
        assert!(matches!(
            fit_geometric_rate(&[0.0; 10]).unwrap(),
            GeometricRate::Converged { points_above_floor: 0 }
        ));
    }

    #[test]
    fn quadratic_profile_is_geometric() {
        let k = discretize(&quadratic(0.1), 512).unwrap();
        let s = stationary(&k, 1e-14).unwrap();
        let d = tv_profile(&k, &s, 40).unwrap();
        let fit = fit_geometric_rate(&d).unwrap();
        assert!(fit.is_geometric(), "{fit:?}");
        assert!(fit.lambda().unwrap() > 1.0);
    }

    #[test]
    fn doeblin_analytic_value() {
        let k = discretize(&doubling(0.25), 512).unwrap();
        let delta = doeblin_margin(&k, 0.75, 1).unwrap();
        assert!((0.48..=0.50 + 1e-12).contains(&delta), "{delta}");
        let report = doubling(0.25).verify_perturbation_conditions(512).unwrap();
        let bounds = constructive_doeblin_bounds(&report, 0.75, 1.0);
        assert_abs_diff_eq!(bounds.ball_overlap, 0.5, epsilon = 1e-9);
        assert!(delta >= bounds.ball_overlap - 2.0 * report.upper_q / 512.0);
        // q̲γ/2 exceeds the attainable margin once γ > 2ρ₀
        assert!(bounds.half_gamma > delta);
    }

    #[test]
    fn doeblin_monotonicity() {
        let k = discretize(&quadratic(0.1), 128).unwrap();
        let gammas = [0.1, 0.3, 0.5, 0.7, 0.9];
        for k_steps in 1..=4 {
            let d: Vec<f64> = gammas
                .iter()
                .map(|g| doeblin_margin(&k, *g, k_steps).unwrap())
                .collect();
            assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
        for g in gammas {
            let d: Vec<f64> = (1..=6).map(|s| doeblin_margin(&k, g, s).unwrap()).collect();
            assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-12), "gamma {g}: {d:?}");
        }
        assert!(doeblin_margin(&k, 1.0, 1).is_err());
        assert!(doeblin_margin(&k, 0.5, 0).is_err());
    }

    #[test]
    fn harris_examples() {
        let sys = doubling(0.25);
        let k = discretize(&sys, 512).unwrap();
        let report = sys.verify_perturbation_conditions(512).unwrap();
        for i in [0, 17, 300, 511] {
            let fx = sys.map.apply_unchecked(k.midpoint(i));
            let b: Vec<usize> = (0..512)
                .filter(|&j| PhaseSpace::Circle.distance(k.midpoint(j), fx) < report.rho0 / 2.0)
                .collect();
            assert!(harris_minorization(&k, &[i], &b).unwrap() >= report.lower_q - 1e-9);
            let far: Vec<usize> = (0..512)
                .filter(|&j| PhaseSpace::Circle.distance(k.midpoint(j), fx) > 0.3)
                .collect();
            assert_eq!(harris_minorization(&k, &[i], &far).unwrap(), 0.0);
        }
        assert!(harris_minorization(&k, &[], &[1]).is_err());
    }

    /// Float matrix powers as an independent route to the primitivity index.
    fn primitivity_by_float_powers(k: &GridKernel, k_max: usize) -> Option<usize> {
        (1..=k_max).find(|&s| k.power(s).iter().all(|p| *p > 0.0))
    }

    #[test]
    fn aperiodicity_examples() {
        let k = discretize(&doubling(0.25), 512).unwrap();
        let idx = aperiodicity_index(&k, 10);
        assert!(matches!(idx, Some(2) | Some(3)), "{idx:?}");
        assert_eq!(idx, primitivity_by_float_powers(&k, 10));

        let q = discretize(&quadratic(0.1), 128).unwrap();
        assert_eq!(aperiodicity_index(&q, 20), primitivity_by_float_powers(&q, 20));

        // 4-cycle of cells: periodic, never primitive
        let mut p = Array2::zeros((4, 4));
        for i in 0..4 {
            p[[i, (i + 1) % 4]] = 1.0;
        }
        let cyc = GridKernel::from_matrix(PhaseSpace::Circle, p).unwrap();
        assert_eq!(aperiodicity_index(&cyc, 50), None);
    }

    #[test]
    fn correlation_examples() {
        let k = discretize(&quadratic(0.1), 256).unwrap();
        let s = stationary(&k, 1e-14).unwrap();
        let x = k.midpoints();
        let phi: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let ind: Vec<f64> = x.iter().map(|v| f64::from(*v > 1.0)).collect();
        let constant = vec![3.0; 256];
        for n in 0..10 {
            assert!(correlation(&k, &s, &phi, &constant, n).unwrap() < 1e-12);
        }
        let mean: f64 = s.probabilities().iter().zip(&ind).map(|(p, v)| p * v).sum();
        let centred: Vec<f64> = ind.iter().map(|v| v - mean).collect();
        assert!(correlation(&k, &s, &centred, &centred, 0).unwrap() > 0.0);

        let d = tv_profile(&k, &s, 20).unwrap();
        for n in 1..=20 {
            let c = correlation(&k, &s, &phi, &ind, n).unwrap();
            assert!(c <= 2.0 * d[n - 1] + 1e-15, "n = {n}");
        }
        let fit = fit_geometric_rate(&d).unwrap();
        if let GeometricRate::Fitted { c, lambda, .. } = fit {
            for n in 1..=20 {
                let cor = correlation(&k, &s, &phi, &ind, n).unwrap();
                assert!(cor <= 2.0 * c * lambda.powi(-(n as i32)) * 1.5, "n = {n}");
            }
        } else {
            panic!("{fit:?}");
        }
        assert!(correlation(&k, &s, &vec![0.0; 256], &ind, 1).is_err());
    }

    #[test]
    fn doubling_decorrelates_exactly_after_two_steps() {
        let k = discretize(&doubling(0.25), 256).unwrap();
        let s = stationary(&k, DEFAULT_TOL).unwrap();
        let x = k.midpoints();
        let phi: Vec<f64> = x.iter().map(|v| f64::from(*v < 0.25)).collect();
        let psi: Vec<f64> = x.iter().map(|v| f64::from(*v < 0.3)).collect();
        assert!(correlation(&k, &s, &phi, &psi, 1).unwrap() > 1e-3);
        for n in 2..6 {
            assert!(correlation(&k, &s, &phi, &psi, n).unwrap() < 1e-14);
        }
    }

    #[test]
    fn positivity_bounds() {
        for (sys, m) in [(doubling(0.25), 512), (quadratic(0.1), 512)] {
            let k = discretize(&sys, m).unwrap();
            let s = stationary(&k, DEFAULT_TOL).unwrap();
            let rep = sys.verify_perturbation_conditions(m).unwrap();
            let p = positivity_report(&k, &s, &rep, 30);
            assert!(p.min_density > 0.0);
            assert!(p.covering_bound <= p.min_density + 1e-12);
            assert!(p.min_density <= 4.0 * p.covering_bound, "{p:?}");
        }
    }
}
