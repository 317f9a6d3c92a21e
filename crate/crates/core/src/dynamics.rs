//! Phase spaces and the deterministic maps that get randomly perturbed.
//!
//! Maps are addressed by string ids (`doubling:k`, `lorenz:beta[:c]`,
//! `quadratic:a`, `gauss`) so configuration files can name them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Orbit values of the Gauss map are kept at or above this floor.
pub const GAUSS_FLOOR: f64 = 1e-12;

/// One-dimensional phase space: the unit circle `[0, 1)` or a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhaseSpace {
    Circle,
    Interval { lo: f64, hi: f64 },
}

impl PhaseSpace {
    pub fn interval(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval [{lo}, {hi}]");
        PhaseSpace::Interval { lo, hi }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            PhaseSpace::Circle => 0.0,
            PhaseSpace::Interval { lo, .. } => lo,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            PhaseSpace::Circle => 1.0,
            PhaseSpace::Interval { hi, .. } => hi,
        }
    }

    pub fn length(&self) -> f64 {
        self.upper() - self.lower()
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, PhaseSpace::Circle)
    }

    /// Shortest-arc distance on the circle, absolute difference on an interval.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match self {
            PhaseSpace::Circle => {
                let d = (x - y).abs().rem_euclid(1.0);
                d.min(1.0 - d)
            }
            PhaseSpace::Interval { .. } => (x - y).abs(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x >= self.lower() && x <= self.upper()
    }

    /// Canonical representative: reduced mod 1 on the circle, unchanged otherwise.
    pub fn normalize(&self, x: f64) -> f64 {
        match self {
            PhaseSpace::Circle => {
                let y = x.rem_euclid(1.0);
                // rem_euclid can round up to exactly 1.0 for tiny negative x
                if y >= 1.0 {
                    0.0
                } else {
                    y
                }
            }
            PhaseSpace::Interval { .. } => x,
        }
    }

    /// Index of the equal-width cell (out of `m`) containing `x`.
    pub fn cell_index(&self, x: f64, m: usize) -> usize {
        let t = (self.normalize(x) - self.lower()) / self.length();
        ((t * m as f64).floor().max(0.0) as usize).min(m - 1)
    }

    pub fn cell_bounds(&self, j: usize, m: usize) -> (f64, f64) {
        let w = self.length() / m as f64;
        let l = self.lower() + j as f64 * w;
        (l, l + w)
    }

    pub fn cell_midpoint(&self, j: usize, m: usize) -> f64 {
        self.lower() + (j as f64 + 0.5) * self.length() / m as f64
    }
}

/// A deterministic map together with its phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum MapSpec {
    /// `x ↦ k·x mod 1` on the circle.
    Doubling { k: u32 },
    /// `x ↦ sign(x)(c|x|^β − 1)` on `[−1, 1]`, discontinuous at 0.
    Lorenz { beta: f64, c: f64 },
    /// `x ↦ a − x²` on its invariant interval `[−b, b]`, `b = (1 + √(1 + 4a))/2`.
    Quadratic { a: f64 },
    /// `x ↦ 1/x mod 1` on `(0, 1]`.
    Gauss,
}

impl MapSpec {
    pub fn doubling(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Input(format!("doubling factor must be >= 2, got {k}")));
        }
        Ok(MapSpec::Doubling { k })
    }

    /// Lorenz-like map with the default slope coefficient `c = 2`.
    pub fn lorenz(beta: f64) -> Result<Self> {
        Self::lorenz_with_slope(beta, 2.0)
    }

    pub fn lorenz_with_slope(beta: f64, c: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Input(format!("lorenz exponent must lie in (0, 1), got {beta}")));
        }
        if !(c > 0.0 && c <= 2.0) {
            return Err(Error::Input(format!(
                "lorenz slope must lie in (0, 2] to map [-1, 1] into itself, got {c}"
            )));
        }
        Ok(MapSpec::Lorenz { beta, c })
    }

    pub fn quadratic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 2.0) {
            return Err(Error::Input(format!("quadratic parameter must lie in (0, 2], got {a}")));
        }
        Ok(MapSpec::Quadratic { a })
    }

    pub fn domain(&self) -> PhaseSpace {
        match *self {
            MapSpec::Doubling { .. } => PhaseSpace::Circle,
            MapSpec::Lorenz { .. } => PhaseSpace::Interval { lo: -1.0, hi: 1.0 },
            MapSpec::Quadratic { a } => {
                let b = 0.5 * (1.0 + (1.0 + 4.0 * a).sqrt());
                PhaseSpace::Interval { lo: -b, hi: b }
            }
            MapSpec::Gauss => PhaseSpace::Interval { lo: 0.0, hi: 1.0 },
        }
    }

    /// Apply the map, rejecting points outside the domain (and 0 for Gauss).
    pub fn apply(&self, x: f64) -> Result<f64> {
        let domain = self.domain();
        let bad = !domain.contains(x) || (matches!(self, MapSpec::Gauss) && x <= 0.0);
        if bad {
            return Err(Error::Domain {
                map: self.to_string(),
                x,
            });
        }
        Ok(self.apply_unchecked(x))
    }

    /// Total version of [`apply`](Self::apply) used inside simulations.
    ///
    /// The Lorenz discontinuity at 0 takes the right limit −1, and Gauss map
    /// arguments and values are floored at [`GAUSS_FLOOR`].
    #[inline]
    pub fn apply_unchecked(&self, x: f64) -> f64 {
        match *self {
            MapSpec::Doubling { k } => PhaseSpace::Circle.normalize(k as f64 * x),
            MapSpec::Lorenz { beta, c } => {
                if x > 0.0 {
                    c * x.powf(beta) - 1.0
                } else if x < 0.0 {
                    1.0 - c * (-x).powf(beta)
                } else {
                    -1.0
                }
            }
            MapSpec::Quadratic { a } => {
                let b = 0.5 * (1.0 + (1.0 + 4.0 * a).sqrt());
                (a - x * x).clamp(-b, b)
            }
            MapSpec::Gauss => {
                let y = 1.0 / x.max(GAUSS_FLOOR);
                (y - y.floor()).max(GAUSS_FLOOR)
            }
        }
    }

    pub fn catalog() -> Vec<(&'static str, &'static str)> {
        vec![
            ("doubling:k", "x -> k x mod 1 on the circle (k >= 2)"),
            (
                "lorenz:beta[:c]",
                "x -> sign(x)(c|x|^beta - 1) on [-1,1], 0<beta<1, default c = 2",
            ),
            ("quadratic:a", "x -> a - x^2 on its invariant interval, 0 < a <= 2"),
            ("gauss", "x -> 1/x mod 1 on (0,1]"),
        ]
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MapSpec::Doubling { k } => write!(f, "doubling:{k}"),
            MapSpec::Lorenz { beta, c: 2.0 } => write!(f, "lorenz:{beta}"),
            MapSpec::Lorenz { beta, c } => write!(f, "lorenz:{beta}:{c}"),
            MapSpec::Quadratic { a } => write!(f, "quadratic:{a}"),
            MapSpec::Gauss => write!(f, "gauss"),
        }
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| Error::Parse {
            what: "map id",
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| parse_err(&e.to_string()));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["doubling", k] => {
                let k = k.trim().parse::<u32>().map_err(|e| parse_err(&e.to_string()))?;
                MapSpec::doubling(k)
            }
            ["lorenz", beta] => MapSpec::lorenz(num(beta)?),
            ["lorenz", beta, c] => MapSpec::lorenz_with_slope(num(beta)?, num(c)?),
            ["quadratic", a] => MapSpec::quadratic(num(a)?),
            ["gauss"] => Ok(MapSpec::Gauss),
            _ => Err(parse_err("expected doubling:k, lorenz:beta[:c], quadratic:a or gauss")),
        }
    }
}

/// Fraction of the `η`-cells of the domain visited by the first `steps`
/// points `x0, f(x0), …` of the unperturbed orbit.
///
/// Iterating `k·x mod 1` in binary floating point sends every orbit to 0
/// within 64 steps, since every double is a dyadic rational. For the
/// `doubling` family the orbit is therefore computed exactly on the decimal
/// rational that `x0` prints as (e.g. `0.1234567891` = 1234567891/10¹⁰).
pub fn dense_orbit_probe(spec: &MapSpec, x0: f64, steps: usize, eta: f64) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Input("orbit probe needs at least one step".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::Input(format!("probe resolution must be positive, got {eta}")));
    }
    spec.apply(x0)?;
    let domain = spec.domain();
    let cells = (domain.length() / eta).ceil() as usize;
    let mut visited = vec![false; cells];

    let exact = match *spec {
        MapSpec::Doubling { k } if cells <= 100_000_000 => decimal_rational(x0).map(|r| (k, r)),
        _ => None,
    };
    if let Some((k, (mut p, q))) = exact {
        let k = k as u128;
        for _ in 0..steps {
            visited[((p * cells as u128) / q) as usize] = true;
            p = (k * p) % q;
        }
    } else {
        let mut x = x0;
        for _ in 0..steps {
            visited[domain.cell_index(x, cells)] = true;
            x = spec.apply_unchecked(x);
        }
    }
    Ok(visited.iter().filter(|v| **v).count() as f64 / cells as f64)
}

/// `x` in `[0, 1)` as a reduced fraction `p/q` of its shortest decimal form.
fn decimal_rational(x: f64) -> Option<(u128, u128)> {
    let text = format!("{}", PhaseSpace::Circle.normalize(x));
    let frac = match text.split_once('.') {
        Some(("0", frac)) => frac,
        None if text == "0" => return Some((0, 1)),
        _ => return None,
    };
    if frac.len() > 30 {
        return None;
    }
    let p: u128 = frac.parse().ok()?;
    let q = 10u128.pow(frac.len() as u32);
    let g = gcd(p, q);
    Some((p / g, q / g))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}
