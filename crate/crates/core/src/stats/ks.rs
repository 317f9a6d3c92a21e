use crate::error::{input, Result};

/// Asymptotic critical value of √N·D at the 5% level.
pub const KS_CRITICAL_5PCT: f64 = 1.358;
/// Asymptotic critical value of √N·D at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub n: usize,
    /// Sup-distance between the empirical and model distribution functions.
    pub d: f64,
    /// √N·D.
    pub scaled: f64,
    /// Asymptotic Kolmogorov upper-tail probability of `scaled`.
    pub p_value: f64,
}

impl KsResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous model `cdf`.
///
/// Inputs are sorted internally; NaN samples are rejected.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < 8 {
        return input(format!("KS needs at least 8 samples, got {}", samples.len()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return input("KS samples contain NaN");
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    let scaled = n.sqrt() * d;
    Ok(KsResult {
        n: xs.len(),
        d,
        scaled,
        p_value: kolmogorov_survival(scaled),
    })
}

/// P(K > x) for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Theta-function form converges fast for small x.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (-j * j * pi2 / (8.0 * x * x)).exp();
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
