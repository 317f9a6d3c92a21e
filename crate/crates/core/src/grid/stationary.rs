use ndarray::Array1;

use crate::dynamics::PhaseSpace;
use crate::error::{input, Error, Result};
use crate::grid::GridKernel;
use crate::stats::RandomStream;

pub const DEFAULT_TOL: f64 = 1e-12;
const DEFAULT_BUDGET: usize = 200_000;

/// Left fixed vector of a [`GridKernel`] and the density it represents.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    space: PhaseSpace,
    pi: Vec<f64>,
    cumulative: Vec<f64>,
    iterations: usize,
    residual: f64,
}

impl StationaryDensity {
    pub fn from_probabilities(space: PhaseSpace, pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return input("stationary vector must be non-empty, finite and non-negative");
        }
        let total: f64 = pi.iter().sum();
        if total <= 0.0 {
            return input("stationary vector has zero mass");
        }
        let pi: Vec<f64> = pi.iter().map(|p| p / total).collect();
        let mut cumulative = Vec::with_capacity(pi.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for p in &pi {
            acc += p;
            cumulative.push(acc);
        }
        Ok(Self {
            space,
            pi,
            cumulative,
            iterations: 0,
            residual: 0.0,
        })
    }

    pub fn space(&self) -> PhaseSpace {
        self.space
    }

    pub fn m(&self) -> usize {
        self.pi.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn cell_width(&self) -> f64 {
        self.space.length() / self.m() as f64
    }

    /// Density values `h_i = π_i / cell width`.
    pub fn density(&self) -> Vec<f64> {
        let w = self.cell_width();
        self.pi.iter().map(|p| p / w).collect()
    }

    /// Smallest cell density, the empirical `h̲`.
    pub fn min_density(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min) / self.cell_width()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `‖πP − π‖₁` against `kernel`.
    pub fn invariance_residual(&self, kernel: &GridKernel) -> f64 {
        let pi = Array1::from(self.pi.clone());
        (&kernel.push_forward(&pi) - &pi).mapv(f64::abs).sum()
    }

    /// Stationary distribution function at `y`, piecewise linear over cells.
    pub fn cdf(&self, y: f64) -> f64 {
        let (lo, w, m) = (self.space.lower(), self.cell_width(), self.m());
        let t = ((y - lo) / w).clamp(0.0, m as f64);
        let j = (t.floor() as usize).min(m - 1);
        self.cumulative[j] + self.pi[j] * (t - j as f64)
    }

    /// Mass of `[a, b]`; on the circle `a` may be negative or `b` exceed 1.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self.space {
            PhaseSpace::Circle => {
                if b - a >= 1.0 {
                    return 1.0;
                }
                let lifted = |y: f64| y.floor() + self.cdf(y - y.floor());
                lifted(b) - lifted(a)
            }
            PhaseSpace::Interval { lo, hi } => self.cdf(b.min(hi)) - self.cdf(a.max(lo)),
        }
    }

    /// Draw a point from the density: a cell by inverse CDF, then uniform in it.
    /// Consumes two draws.
    pub fn sample_point(&self, stream: &mut RandomStream) -> f64 {
        let u = stream.uniform();
        let j = self.cumulative[1..].partition_point(|&c| c < u).min(self.m() - 1);
        let (l, r) = self.space.cell_bounds(j, self.m());
        self.space.normalize(stream.uniform_in(l, r))
    }

    /// Draw from the density restricted to the ball `B_r(center)`. Consumes two draws.
    pub fn sample_point_in_ball(&self, center: f64, radius: f64, stream: &mut RandomStream) -> f64 {
        let (a, b) = match self.space {
            PhaseSpace::Circle => (center - radius.min(0.5), center + radius.min(0.5)),
            PhaseSpace::Interval { lo, hi } => ((center - radius).max(lo), (center + radius).min(hi)),
        };
        let total = self.interval_mass(a, b);
        let target = stream.uniform() * total;
        // invert the (continuous, non-decreasing) partial mass by bisection
        let (mut x, mut y) = (a, b);
        for _ in 0..80 {
            let mid = 0.5 * (x + y);
            if self.interval_mass(a, mid) < target {
                x = mid;
            } else {
                y = mid;
            }
        }
        let _ = stream.uniform();
        self.space.normalize(0.5 * (x + y))
    }
}

/// Power iteration from the uniform vector until the L¹ change drops below `tol`.
pub fn stationary(kernel: &GridKernel, tol: f64) -> Result<StationaryDensity> {
    stationary_with_budget(kernel, tol, DEFAULT_BUDGET)
}

pub fn stationary_with_budget(kernel: &GridKernel, tol: f64, max_iterations: usize) -> Result<StationaryDensity> {
    if !(tol > 0.0) {
        return input(format!("tolerance must be positive, got {tol}"));
    }
    let m = kernel.m();
    let mut v = Array1::from_elem(m, 1.0 / m as f64);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iterations {
        let mut next = kernel.push_forward(&v);
        let s = next.sum();
        next /= s;
        residual = (&next - &v).mapv(f64::abs).sum();
        v = next;
        if residual < tol {
            let mut d = StationaryDensity::from_probabilities(kernel.space(), v.to_vec())?;
            d.iterations = it;
            d.residual = residual;
            return Ok(d);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual,
    })
}
