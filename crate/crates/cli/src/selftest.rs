//! Fast checks of the statistical harness against known null laws.
//!
//! Repetition thresholds allow up to four rejections in 100 draws at the 1%
//! level, which a correct test exceeds with probability about 0.3%.

use raremap_core::dynamics::MapSpec;
use raremap_core::extremes::count_block_survivors;
use raremap_core::grid::{discretize, kac_product, stationary, DEFAULT_TOL};
use raremap_core::noise::{Boundary, NoiseSpec, RandomMap};
use raremap_core::recurrence::hts_test;
use raremap_core::repp::poisson_tests;
use raremap_core::stats::{chi2_gof, ks_statistic, poisson_histogram, RandomStream, StreamTag};
use raremap_core::MarkovStep;

use crate::scenario::Criterion;

struct Iid;

impl MarkovStep for Iid {
    type State = f64;
    fn step(&self, _: f64, s: &mut RandomStream) -> f64 {
        s.uniform()
    }
}

pub fn run(seed: u64) -> Vec<Criterion> {
    let mut out = Vec::new();

    let ks_ok = (0..100u64)
        .filter(|&r| {
            let mut s = RandomStream::for_trial(seed, StreamTag::Test, r);
            let xs: Vec<f64> = (0..2000).map(|_| s.uniform()).collect();
            ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).is_ok_and(|k| k.p_value > 0.01)
        })
        .count();
    out.push(Criterion::new(
        "ks_null",
        ks_ok >= 96,
        ks_ok as f64,
        ">= 96/100 uniform samples pass at 1%",
    ));

    let chi_ok = (0..100u64)
        .filter(|&r| {
            let mut s = RandomStream::for_trial(seed, StreamTag::Test, 1000 + r);
            let xs: Vec<u64> = (0..10_000).map(|_| s.poisson(1.0)).collect();
            let (counts, pmf) = poisson_histogram(&xs, 1.0);
            chi2_gof(&counts, &pmf).is_ok_and(|c| c.p_value > 0.01)
        })
        .count();
    out.push(Criterion::new(
        "chi2_null",
        chi_ok >= 96,
        chi_ok as f64,
        ">= 96/100 Poisson samples pass at 1%",
    ));

    let mut s = RandomStream::for_trial(seed, StreamTag::Test, 5000);
    let counts: Vec<u64> = (0..4000).map(|_| s.poisson(1.0)).collect();
    let gaps: Vec<f64> = (0..2000).map(|_| s.exponential()).collect();
    let repp = poisson_tests(&counts, &gaps).map(|t| t.pass()).unwrap_or(false);
    out.push(Criterion::new(
        "repp_null",
        repp,
        f64::from(u8::from(repp)),
        "Poisson(1) counts pass all tests",
    ));

    let hts = hts_test(&gaps).map(|r| r.pass).unwrap_or(false);
    out.push(Criterion::new(
        "hts_null",
        hts,
        f64::from(u8::from(hts)),
        "Exp(1) times pass the HTS test",
    ));

    let (n, trials) = (500u64, 20_000u64);
    let survivors = count_block_survivors(
        &Iid,
        |s| s.uniform(),
        |x| x < 1.0 / n as f64,
        n,
        trials,
        seed,
        StreamTag::Test,
    );
    let p_hat = survivors as f64 / trials as f64;
    let expected = (1.0 - 1.0 / n as f64).powi(n as i32);
    let tol = 3.0 * (expected * (1.0 - expected) / trials as f64).sqrt();
    out.push(Criterion::new(
        "iid_maxima",
        (p_hat - expected).abs() <= tol,
        p_hat,
        format!("within {tol:.4} of (1 - 1/n)^n"),
    ));

    let kac = RandomMap::new(
        MapSpec::Doubling { k: 2 },
        NoiseSpec {
            epsilon: 0.25,
            boundary: Boundary::Wrap,
        },
    )
    .and_then(|sys| discretize(&sys, 128))
    .and_then(|k| {
        let d = stationary(&k, DEFAULT_TOL)?;
        kac_product(&k, &d, &[5, 6, 7])
    })
    .unwrap_or(f64::NAN);
    out.push(Criterion::new(
        "kac_grid",
        (kac - 1.0).abs() <= 1e-6,
        kac,
        "|E_U[r] mu(U) - 1| <= 1e-6",
    ));

    let a: Vec<u64> = {
        let mut s = RandomStream::new(seed, 99);
        (0..4).map(|_| s.next_u64()).collect()
    };
    let b: Vec<u64> = {
        let mut s = RandomStream::new(seed, 99);
        (0..4).map(|_| s.next_u64()).collect()
    };
    out.push(Criterion::new(
        "stream_reproducible",
        a == b,
        0.0,
        "same (seed, stream) gives same draws",
    ));
    out
}
