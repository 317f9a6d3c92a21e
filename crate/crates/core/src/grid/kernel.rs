use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use crate::dynamics::PhaseSpace;
use crate::error::{input, Result};
use crate::noise::RandomMap;

/// Where the transition probability of a source cell is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UlamRule {
    /// Transition probabilities from the cell midpoint.
    #[default]
    Midpoint,
    /// Average over `samples` equally spaced points of the source cell.
    SourceAverage { samples: usize },
}

/// Row-stochastic matrix over `m` equal cells of the phase space.
#[derive(Debug, Clone)]
pub struct GridKernel {
    space: PhaseSpace,
    matrix: Array2<f64>,
}

impl GridKernel {
    /// Wrap a matrix, checking it is square, non-negative and row-stochastic.
    pub fn from_matrix(space: PhaseSpace, matrix: Array2<f64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols || rows == 0 {
            return input(format!("kernel must be square and non-empty, got {rows}x{cols}"));
        }
        if matrix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return input("kernel entries must be finite and non-negative");
        }
        for (i, row) in matrix.axis_iter(Axis(0)).enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > 1e-12 {
                return input(format!("row {i} sums to {s}"));
            }
        }
        Ok(Self { space, matrix })
    }

    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn space(&self) -> PhaseSpace {
        self.space
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Lebesgue length of one cell.
    pub fn cell_width(&self) -> f64 {
        self.space.length() / self.m() as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.space.cell_midpoint(i, self.m())
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.midpoint(i)).collect()
    }

    pub fn cell_of(&self, x: f64) -> usize {
        self.space.cell_index(x, self.m())
    }

    /// `k`-step matrix by repeated multiplication (`k = 0` is the identity).
    pub fn power(&self, k: usize) -> Array2<f64> {
        let mut acc = Array2::eye(self.m());
        for _ in 0..k {
            acc = acc.dot(&self.matrix);
        }
        acc
    }

    /// Push a distribution forward one step: `v ↦ v·P`.
    pub fn push_forward(&self, v: &Array1<f64>) -> Array1<f64> {
        v.dot(&self.matrix)
    }

    /// Pull a function back one step: `f ↦ P·f`.
    pub fn pull_back(&self, f: &Array1<f64>) -> Array1<f64> {
        self.matrix.dot(f)
    }
}

/// Midpoint Ulam discretization with closed-form cell overlaps.
pub fn discretize(system: &RandomMap, m: usize) -> Result<GridKernel> {
    discretize_with(system, m, UlamRule::Midpoint)
}

pub fn discretize_with(system: &RandomMap, m: usize, rule: UlamRule) -> Result<GridKernel> {
    if m < 16 {
        return input(format!("grid needs at least 16 cells, got {m}"));
    }
    let space = system.domain();
    let sources: Vec<f64> = match rule {
        UlamRule::Midpoint => vec![0.5],
        UlamRule::SourceAverage { samples } if samples >= 1 => {
            (0..samples).map(|s| (s as f64 + 0.5) / samples as f64).collect()
        }
        UlamRule::SourceAverage { .. } => return input("source averaging needs at least one sample"),
    };
    let w = space.length() / m as f64;
    let edges: Vec<(f64, f64)> = (0..m).map(|j| space.cell_bounds(j, m)).collect();

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m];
            for &s in &sources {
                let x = space.lower() + (i as f64 + s) * w;
                for (j, &(l, r)) in edges.iter().enumerate() {
                    row[j] += system.transition_mass(x, l, r);
                }
            }
            let k = sources.len() as f64;
            row.iter_mut().for_each(|p| *p /= k);
            row
        })
        .collect();

    let mut matrix = Array2::zeros((m, m));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, p) in row.into_iter().enumerate() {
            matrix[[i, j]] = p;
        }
    }
    GridKernel::from_matrix(space, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::noise::{Boundary, NoiseSpec};
    use approx::assert_abs_diff_eq;

    fn doubling(eps: f64) -> RandomMap {
        RandomMap::new(
            MapSpec::doubling(2).unwrap(),
            NoiseSpec::uniform(eps, Boundary::Wrap).unwrap(),
        )
        .unwrap()
    }

    /// Overlap of each cell with the arc of length 2ε centred at `c`,
    /// computed by brute-force sub-sampling of the cell.
    fn arc_overlap_oracle(c: f64, eps: f64, l: f64, r: f64) -> f64 {
        let n = 4096;
        let inside = (0..n)
            .filter(|k| {
                let y = l + (r - l) * (*k as f64 + 0.5) / n as f64;
                PhaseSpace::Circle.distance(y, c) < eps
            })
            .count();
        (r - l) * inside as f64 / n as f64
    }

    #[test]
    fn doubling_rows_match_overlap_oracle() {
        let eps = 0.25;
        let k = discretize(&doubling(eps), 16).unwrap();
        for i in 0..16 {
            let c = (2.0 * k.midpoint(i)).rem_euclid(1.0);
            for j in 0..16 {
                let (l, r) = PhaseSpace::Circle.cell_bounds(j, 16);
                let expected = arc_overlap_oracle(c, eps, l, r) / (2.0 * eps);
                assert_abs_diff_eq!(k.matrix()[[i, j]], expected, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn arc_covers_whole_cells() {
        // the arc of length 1/2 around 2·x_i starts and ends on cell edges
        let k = discretize(&doubling(0.25), 16).unwrap();
        for row in k.matrix().axis_iter(Axis(0)) {
            assert!(row.iter().all(|&p| p == 0.0 || (p - 0.125).abs() < 1e-15));
            assert_eq!(row.iter().filter(|p| **p > 0.0).count(), 8);
        }
        assert!(discretize(&doubling(0.25), 8).is_err());
    }

    #[test]
    fn full_support_is_uniform() {
        let k = discretize(&doubling(0.5), 64).unwrap();
        for p in k.matrix().iter() {
            assert_abs_diff_eq!(*p, 1.0 / 64.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rows_are_stochastic() {
        let q = RandomMap::new(
            MapSpec::quadratic(2.0).unwrap(),
            NoiseSpec::uniform(0.1, Boundary::Reflect).unwrap(),
        )
        .unwrap();
        let l = RandomMap::new(
            MapSpec::lorenz(0.75).unwrap(),
            NoiseSpec::uniform(0.05, Boundary::Reflect).unwrap(),
        )
        .unwrap();
        for sys in [doubling(0.25), doubling(0.03), q, l] {
            for rule in [UlamRule::Midpoint, UlamRule::SourceAverage { samples: 4 }] {
                let k = discretize_with(&sys, 128, rule).unwrap();
                for row in k.matrix().axis_iter(Axis(0)) {
                    assert!((row.sum() - 1.0).abs() < 1e-12);
                    assert!(row.iter().all(|p| *p >= 0.0));
                }
            }
        }
    }

    #[test]
    fn row_support_covers_the_noise_ball() {
        let sys = doubling(0.1);
        let k = discretize(&sys, 256).unwrap();
        let w = k.cell_width();
        for row in k.matrix().axis_iter(Axis(0)) {
            let support = row.iter().filter(|p| **p > 0.0).count() as f64 * w;
            assert!(support >= 2.0 * 0.1 - 2.0 * w);
        }
    }

    #[test]
    fn rejects_invalid_matrices() {
        let bad = Array2::from_shape_vec((2, 2), vec![0.5, 0.4, 0.5, 0.5]).unwrap();
        assert!(GridKernel::from_matrix(PhaseSpace::Circle, bad).is_err());
        let neg = Array2::from_shape_vec((2, 2), vec![1.5, -0.5, 0.5, 0.5]).unwrap();
        assert!(GridKernel::from_matrix(PhaseSpace::Circle, neg).is_err());
    }
}
