//! Randomly perturbed interval and circle maps.
//!
//! The crate simulates `x ↦ f(x) + ω` for a catalog of one-dimensional maps
//! `f` with uniform noise `ω`, discretizes the induced Markov kernel on a
//! grid, and checks the resulting chain against its limit laws:
//!
//! * [`grid`]: stationary density, total-variation decay, Doeblin and Harris
//!   constants, exact correlations and taboo probabilities;
//! * [`extremes`]: level calibration, block-maxima (EVL) estimates and the
//!   anti-clustering statistic;
//! * [`recurrence`]: hitting/return times, Kac normalization and the
//!   exponential law;
//! * [`repp`]: the rare event point process and its Poisson tests.
//!
//! All Monte Carlo work draws from counter-based [`RandomStream`]s derived
//! from a master seed, so results do not depend on scheduling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod dynamics;
pub mod error;
pub mod extremes;
pub mod grid;
pub mod noise;
pub mod recurrence;
pub mod repp;
pub mod stats;

pub use chain::{MarkovStep, StartLaw};
pub use dynamics::{dense_orbit_probe, MapSpec, PhaseSpace};
pub use error::{Error, Result};
pub use extremes::{build_observable, calibrate_levels, GVariant, LevelEntry, Observable, TargetBall};
pub use grid::{discretize, stationary, GridKernel, StationaryDensity};
pub use noise::{Boundary, NoiseSpec, PerturbationReport, RandomMap};
pub use stats::{RandomStream, StreamTag};
