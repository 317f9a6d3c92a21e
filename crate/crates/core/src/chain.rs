use crate::noise::RandomMap;
use crate::stats::RandomStream;

/// A Markov chain that can be advanced one step with a random stream.
pub trait MarkovStep: Sync {
    type State: Copy + Send;

    fn step(&self, state: Self::State, stream: &mut RandomStream) -> Self::State;
}

impl MarkovStep for RandomMap {
    type State = f64;

    #[inline]
    fn step(&self, state: f64, stream: &mut RandomStream) -> f64 {
        self.sample_step(state, stream)
    }
}

use crate::grid::StationaryDensity;

/// Law of the initial point of each simulated trajectory.
#[derive(Debug, Clone, Copy)]
pub enum StartLaw<'a> {
    /// Annealed start: a draw from the grid stationary density.
    Stationary(&'a StationaryDensity),
    /// Kernel-free start: run `steps` perturbed steps from `x0` first.
    BurnIn { x0: f64, steps: usize },
}

impl StartLaw<'_> {
    pub fn draw(&self, system: &RandomMap, stream: &mut RandomStream) -> f64 {
        match *self {
            StartLaw::Stationary(density) => density.sample_point(stream),
            StartLaw::BurnIn { x0, steps } => {
                let mut x = x0;
                for _ in 0..steps {
                    x = system.sample_step(x, stream);
                }
                x
            }
        }
    }
}
