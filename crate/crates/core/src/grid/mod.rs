//! Ulam discretization of the transition kernel and the exact computations
//! it enables: stationary density, total-variation profiles, minorization
//! constants, correlations and taboo (avoidance) probabilities.

mod chain;
mod diagnostics;
mod export;
mod kernel;
mod stationary;
mod taboo;

pub use chain::GridChain;
pub use diagnostics::{
    aperiodicity_index, constructive_doeblin_bounds, correlation, doeblin_margin, fit_geometric_rate,
    harris_minorization, positivity_report, tv_profile, DoeblinBounds, GeometricRate, PositivityReport, TV_FLOOR,
};
pub use export::{write_kernel_csv, write_stationary_csv, KernelHeader};
pub use kernel::{discretize, discretize_with, GridKernel, UlamRule};
pub use stationary::{stationary, stationary_with_budget, StationaryDensity, DEFAULT_TOL};
pub use taboo::{avoidance_probability, cell_mask, kac_product, return_time_survival, taboo_survival, TabooSurvival};
