use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{input, Result};

const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after merging sparse ones.
    pub bins: usize,
}

impl Chi2Result {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Pearson χ² goodness of fit of `counts` against the probabilities `pmf`.
///
/// `pmf` must cover the whole support (the last entry is usually a tail
/// mass). Adjacent bins are merged left to right until every merged bin
/// expects at least five observations; a short remainder at the end is folded
/// into the last merged bin.
pub fn chi2_gof(counts: &[u64], pmf: &[f64]) -> Result<Chi2Result> {
    if counts.len() != pmf.len() {
        return input(format!("{} counts but {} probabilities", counts.len(), pmf.len()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return input("chi-square test on all-zero counts");
    }
    if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return input("model probabilities must be finite and non-negative");
    }
    let mass: f64 = pmf.iter().sum();
    if (mass - 1.0).abs() > 1e-6 {
        return input(format!("model probabilities sum to {mass}, expected 1"));
    }
    let n = total as f64;

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(pmf) {
        obs += c as f64;
        exp += p * n;
        if exp >= MIN_EXPECTED {
            merged.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => merged.push((obs, exp)),
        }
    }
    if merged.len() < 2 {
        return input("fewer than two bins remain after merging sparse bins");
    }

    let statistic: f64 = merged
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else { 0.0 })
        .sum();
    let dof = merged.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN);
    Ok(Chi2Result {
        statistic,
        dof,
        p_value,
        bins: merged.len(),
    })
}

/// Histogram of integer observations with the matching Poisson(`mean`) pmf.
///
/// Bins are `0, 1, ..., k_max` followed by a tail bin for values above
/// `k_max`, where `k_max` is the largest observation.
pub fn poisson_histogram(values: &[u64], mean: f64) -> (Vec<u64>, Vec<f64>) {
    let k_max = values.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; k_max + 2];
    for &v in values {
        counts[v as usize] += 1;
    }
    let mut pmf = Vec::with_capacity(k_max + 2);
    let mut p = (-mean).exp();
    let mut cumulative = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            p *= mean / k as f64;
        }
        pmf.push(p);
        cumulative += p;
    }
    pmf.push((1.0 - cumulative).max(0.0));
    (counts, pmf)
}
