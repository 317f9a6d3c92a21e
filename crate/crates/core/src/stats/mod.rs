//! Shared statistics and randomness.
//!
//! Goodness-of-fit statistics (Kolmogorov–Smirnov, Pearson χ²), least-squares
//! fits, binomial intervals, empirical distribution functions and the
//! counter-based [`RandomStream`] used by every Monte Carlo routine.

mod chi2;
mod fit;
mod ks;
mod stream;
mod summary;

pub use chi2::{chi2_gof, poisson_histogram, Chi2Result};
pub use fit::{linear_fit, LinearFit};
pub use ks::{kolmogorov_survival, ks_statistic, KsResult, KS_CRITICAL_1PCT, KS_CRITICAL_5PCT};
pub use stream::{stream_id, RandomStream, StreamTag};
pub use summary::{mean_and_se, wilson_interval, EmpiricalCdf, MeanSe, WilsonInterval};
