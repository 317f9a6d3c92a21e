use ndarray::Axis;

use crate::chain::MarkovStep;
use crate::grid::GridKernel;
use crate::stats::RandomStream;

/// Sampler for the discretized chain itself, on cell indices.
#[derive(Debug, Clone)]
pub struct GridChain {
    rows: Vec<Vec<f64>>,
}

impl GridChain {
    pub fn new(kernel: &GridKernel) -> Self {
        let rows = kernel
            .matrix()
            .axis_iter(Axis(0))
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }
}

impl MarkovStep for GridChain {
    type State = usize;

    fn step(&self, state: usize, stream: &mut RandomStream) -> usize {
        let row = &self.rows[state];
        let u = stream.uniform() * row[row.len() - 1];
        row.partition_point(|&c| c < u).min(row.len() - 1)
    }
}
