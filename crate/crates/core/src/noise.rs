//! Uniform additive random perturbations of a [`MapSpec`].
//!
//! One randomized step is `x ↦ f(x) + ω` with `ω` uniform on `(−ε, ε)`,
//! wrapped mod 1 on the circle or reflected at the endpoints of an interval.
//! The transition density from `x` is then piecewise constant with values in
//! `{0, 1/(2ε), 1/ε}`, which gives closed forms for everything downstream.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{MapSpec, PhaseSpace};
use crate::error::{Error, Result};
use crate::stats::RandomStream;

pub type Trajectory = Vec<f64>;

/// How perturbed points are brought back into the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Reduce mod 1 (circle only).
    Wrap,
    /// Mirror at the nearest endpoint (interval only). Clamping would put an
    /// atom at the endpoint and break absolute continuity.
    Reflect,
}

/// Uniform noise of amplitude `epsilon`. `epsilon == 0` disables the noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub boundary: Boundary,
}

impl NoiseSpec {
    pub fn uniform(epsilon: f64, boundary: Boundary) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Input(format!("noise amplitude must be >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon, boundary })
    }

    pub fn disabled(boundary: Boundary) -> Self {
        Self { epsilon: 0.0, boundary }
    }

    pub fn is_disabled(&self) -> bool {
        self.epsilon == 0.0
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.boundary {
            Boundary::Wrap => "wrap",
            Boundary::Reflect => "reflect",
        };
        write!(f, "uniform:epsilon={}:boundary={b}", self.epsilon)
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    /// Parses `uniform:epsilon=E:boundary=wrap|reflect`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            what: "noise id",
            text: s.to_string(),
            reason,
        };
        let mut parts = s.trim().split(':');
        if parts.next() != Some("uniform") {
            return Err(err("only `uniform` noise is supported".into()));
        }
        let (mut epsilon, mut boundary) = (None, None);
        for part in parts {
            match part.split_once('=') {
                Some(("epsilon", v)) => epsilon = Some(v.trim().parse::<f64>().map_err(|e| err(e.to_string()))?),
                Some(("boundary", "wrap")) => boundary = Some(Boundary::Wrap),
                Some(("boundary", "reflect")) => boundary = Some(Boundary::Reflect),
                _ => return Err(err(format!("unexpected field `{part}`"))),
            }
        }
        let epsilon = epsilon.ok_or_else(|| err("missing epsilon".into()))?;
        let boundary = boundary.ok_or_else(|| err("missing boundary".into()))?;
        if epsilon <= 0.0 {
            return Err(err("epsilon must be positive".into()));
        }
        NoiseSpec::uniform(epsilon, boundary)
    }
}

/// A map together with its random perturbation: the Markov chain under study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomMap {
    pub map: MapSpec,
    pub noise: NoiseSpec,
}

/// Result of probing the perturbation hypotheses on a grid of base points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationReport {
    /// Largest radius `r` (to grid resolution) such that the density is
    /// positive on `B_r(f(x))` for every probe `x`.
    pub rho0: f64,
    /// Minimum positive density value seen.
    pub lower_q: f64,
    /// Maximum density value seen.
    pub upper_q: f64,
    pub probes: usize,
    /// Spacing of the radial scan and of the probe grid.
    pub resolution: f64,
    pub holds: bool,
}

impl RandomMap {
    pub fn new(map: MapSpec, noise: NoiseSpec) -> Result<Self> {
        let domain = map.domain();
        match (domain.is_circle(), noise.boundary) {
            (true, Boundary::Wrap) | (false, Boundary::Reflect) => {}
            (true, Boundary::Reflect) => {
                return Err(Error::Input("reflecting noise is only defined on intervals".into()))
            }
            (false, Boundary::Wrap) => return Err(Error::Input("wrapping noise is only defined on the circle".into())),
        }
        if noise.epsilon > 0.5 * domain.length() {
            return Err(Error::Input(format!(
                "noise amplitude {} exceeds half the domain length {}",
                noise.epsilon,
                0.5 * domain.length()
            )));
        }
        Ok(Self { map, noise })
    }

    pub fn domain(&self) -> PhaseSpace {
        self.map.domain()
    }

    /// The perturbed step for an explicit noise value `omega`.
    #[inline]
    pub fn step_with(&self, x: f64, omega: f64) -> f64 {
        let y = self.map.apply_unchecked(x) + omega;
        match self.domain() {
            PhaseSpace::Circle => PhaseSpace::Circle.normalize(y),
            PhaseSpace::Interval { lo, hi } => {
                if y < lo {
                    2.0 * lo - y
                } else if y > hi {
                    2.0 * hi - y
                } else {
                    y
                }
            }
        }
    }

    /// One randomized step; consumes exactly one draw from `stream`.
    #[inline]
    pub fn sample_step(&self, x: f64, stream: &mut RandomStream) -> f64 {
        let u = stream.uniform();
        self.step_with(x, self.noise.epsilon * (2.0 * u - 1.0))
    }

    /// `n + 1` points starting at `x0`, consuming exactly `n` draws.
    pub fn simulate_trajectory(&self, x0: f64, n: usize, stream: &mut RandomStream) -> Trajectory {
        let mut out = Vec::with_capacity(n + 1);
        let mut x = x0;
        out.push(x);
        for _ in 0..n {
            x = self.sample_step(x, stream);
            out.push(x);
        }
        out
    }

    /// Transition density `q_x(y)` with respect to Lebesgue measure.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let eps = self.noise.epsilon;
        if eps == 0.0 {
            return 0.0;
        }
        let c = self.map.apply_unchecked(x);
        let inside = |z: f64| (z - c).abs() < eps;
        let folds = match self.domain() {
            PhaseSpace::Circle => usize::from(PhaseSpace::Circle.distance(y, c) < eps),
            PhaseSpace::Interval { lo, hi } => {
                usize::from(inside(y)) + usize::from(inside(2.0 * lo - y)) + usize::from(inside(2.0 * hi - y))
            }
        };
        folds as f64 / (2.0 * eps)
    }

    /// Probability that one step from `x` lands in `[l, r]` (a subset of the domain).
    pub fn transition_mass(&self, x: f64, l: f64, r: f64) -> f64 {
        let eps = self.noise.epsilon;
        let c = self.map.apply_unchecked(x);
        if eps == 0.0 {
            let c = self.domain().normalize(c);
            return if c >= l && c < r { 1.0 } else { 0.0 };
        }
        let (slo, shi) = (c - eps, c + eps);
        let overlap = |a: f64, b: f64| (b.min(shi) - a.max(slo)).max(0.0);
        let covered = match self.domain() {
            PhaseSpace::Circle => overlap(l - 1.0, r - 1.0) + overlap(l, r) + overlap(l + 1.0, r + 1.0),
            PhaseSpace::Interval { lo, hi } => {
                overlap(l, r) + overlap(2.0 * lo - r, 2.0 * lo - l) + overlap(2.0 * hi - r, 2.0 * hi - l)
            }
        };
        covered / (2.0 * eps)
    }

    /// Probe the covering radius and density bounds at `m` cell-midpoint base points.
    pub fn verify_perturbation_conditions(&self, m: usize) -> Result<PerturbationReport> {
        if m < 64 {
            return Err(Error::Input(format!("need at least 64 probe points, got {m}")));
        }
        let domain = self.domain();
        let h = domain.length() / m as f64;
        let max_radius = if domain.is_circle() { 0.5 } else { domain.length() };
        let fine = 4 * m;

        let mut rho0 = f64::INFINITY;
        let mut lower_q = f64::INFINITY;
        let mut upper_q = 0.0f64;
        for i in 0..m {
            let x = domain.cell_midpoint(i, m);
            let c = self.map.apply_unchecked(x);
            rho0 = rho0.min(self.support_radius(x, c, h, max_radius));
            for j in 0..fine {
                let q = self.density(x, domain.cell_midpoint(j, fine));
                if q > 0.0 {
                    lower_q = lower_q.min(q);
                    upper_q = upper_q.max(q);
                }
            }
        }
        if !lower_q.is_finite() {
            lower_q = 0.0;
        }
        Ok(PerturbationReport {
            rho0,
            lower_q,
            upper_q,
            probes: m,
            resolution: h,
            holds: rho0 > 0.0 && lower_q > 0.0,
        })
    }

    /// Radius of the largest ball around `c = f(x)` (intersected with the
    /// domain) on which the density stays positive: coarse scan at spacing
    /// `h`, then bisection on the first failing shell.
    fn support_radius(&self, x: f64, c: f64, h: f64, max_radius: f64) -> f64 {
        let domain = self.domain();
        let positive_at = |r: f64| {
            [c - r, c + r].iter().all(|&y| {
                let y = domain.normalize(y);
                !domain.contains(y) || self.density(x, y) > 0.0
            })
        };
        if !positive_at(0.0) {
            return 0.0;
        }
        let mut prev = 0.0;
        let mut k = 1;
        loop {
            let r = (k as f64 * h).min(max_radius);
            if !positive_at(r) {
                let (mut a, mut b) = (prev, r);
                while b - a > 1e-13 {
                    let mid = 0.5 * (a + b);
                    if positive_at(mid) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return b;
            }
            if r >= max_radius {
                return max_radius;
            }
            prev = r;
            k += 1;
        }
    }
}
