//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use raremap_cli::config::{DPrimeParams, DecayParams, EvlParams, ExperimentConfig, HtsParams, ReppParams, StartMode};
use raremap_cli::scenario::{run_decay, run_dprime, run_evl, run_hts, run_repp, three_sigma, Setup};
use raremap_core::grid::{
    constructive_doeblin_bounds, discretize, doeblin_margin, fit_geometric_rate, stationary, tv_profile, GeometricRate,
    DEFAULT_TOL,
};

const SEED: u64 = 20261018;

fn doubling_config(m: usize, scenario: &str) -> ExperimentConfig {
    config("doubling:2", "uniform:epsilon=0.25:boundary=wrap", m, scenario)
}

fn quadratic_config(m: usize, scenario: &str) -> ExperimentConfig {
    config("quadratic:2", "uniform:epsilon=0.1:boundary=reflect", m, scenario)
}

fn config(map: &str, noise: &str, m: usize, scenario: &str) -> ExperimentConfig {
    let text =
        format!("map = \"{map}\"\nnoise = \"{noise}\"\nseed = {SEED}\n\n[grid]\nm = {m}\n\n[scenario]\n{scenario}\n");
    ExperimentConfig::parse(&text).expect("valid acceptance config")
}

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn r2(rate: &GeometricRate) -> String {
    match rate {
        GeometricRate::Fitted { lambda, r_squared, .. } => format!("r2={r_squared:.4} lambda={lambda:.4}"),
        GeometricRate::Converged { points_above_floor } => {
            format!("no fit: only {points_above_floor} profile values above 1e-14")
        }
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let cfg = doubling_config(512, "kind = \"markov\"");
    let k = discretize(&cfg.system().unwrap(), 512).unwrap();
    let s = stationary(&k, DEFAULT_TOL).unwrap();
    let dev = s.density().iter().map(|h| (h - 1.0).abs()).fold(0.0, f64::max);
    let el = t.elapsed();
    outcome(
        dev < 1e-6 && el < Duration::from_secs(5),
        format!("max|h-1|={dev:.3e} (< 1e-6), runtime {} (< 5s)", secs(el)),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, cfg) in [
        ("doubling eps=0.25", doubling_config(512, "kind = \"markov\"")),
        ("quadratic eps=0.1", quadratic_config(512, "kind = \"markov\"")),
    ] {
        let t = Instant::now();
        let k = discretize(&cfg.system().unwrap(), 512).unwrap();
        let s = stationary(&k, DEFAULT_TOL).unwrap();
        let fit = fit_geometric_rate(&tv_profile(&k, &s, 40).unwrap()).unwrap();
        let el = t.elapsed();
        let ok = fit.is_geometric() && fit.lambda().is_some_and(|l| l > 1.0) && el < Duration::from_secs(30);
        pass &= ok;
        parts.push(format!(
            "{name}: {} runtime {} [{}]",
            r2(&fit),
            secs(el),
            if ok { "ok" } else { "fail" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let cfg = doubling_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let m = setup.kernel.m();
    let delta = doeblin_margin(&setup.kernel, 0.75, 1).unwrap();
    let bounds = constructive_doeblin_bounds(&setup.perturbation, 0.75, 1.0);
    let slack = 2.0 * setup.perturbation.upper_q / m as f64;
    let lower = bounds.half_gamma - slack;
    let el = t.elapsed();
    let in_range = (0.48..=0.50).contains(&delta);
    let above = delta >= lower;
    outcome(
        in_range && above && el < Duration::from_secs(10),
        format!(
            "delta_hat={delta:.6} in [0.48,0.50]: {in_range}; q_lo*gamma/2 - 2 q_hi/m = {lower:.6}, delta_hat >= it: {above}; \
             ball-overlap bound q_lo(gamma+2rho0-1) - 2q_hi/m = {:.6}; runtime {}",
            bounds.ball_overlap - slack,
            secs(el)
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = quadratic_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = DecayParams {
        n_max: 40,
        cor_n: 20,
        phi_center: 0.0,
        psi_threshold: 1.0,
        check_correlation: true,
    };
    let out = run_decay(&setup, &p).unwrap();
    let fit_ok = matches!(out.correlation_fit, GeometricRate::Fitted { r_squared, points, .. } if r_squared >= 0.95 && points == 20);
    let excess = out.domination_excess();
    outcome(
        fit_ok && excess <= 0.0,
        format!(
            "phi=|x|, psi=1{{x>1}} on quadratic eps=0.1: Cor fit {} over n=1..20 (r2 >= 0.95); max Cor(n)-2d(n) = {excess:.3e} (<= 0)",
            r2(&out.correlation_fit)
        ),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let cfg = doubling_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = EvlParams {
        center: 0.3,
        taus: vec![0.5, 1.0, 2.0],
        ns: vec![5000],
        trials: 20_000,
        start: StartMode::Stationary,
        check_limit: true,
        oracle: false,
    };
    let out = run_evl(&setup, &p).unwrap();
    let el = t.elapsed();
    let mut pass = el < Duration::from_secs(600);
    let mut parts = Vec::new();
    for row in &out.rows {
        let e = &row.estimate;
        let tol = three_sigma(e.target, e.trials);
        let ok = (e.p_hat - e.target).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "tau={}: p_hat={:.5} target={:.5} tol={tol:.5}",
            e.tau, e.p_hat, e.target
        ));
    }
    outcome(pass, format!("{}; runtime {}", parts.join(", "), secs(el)))
}

fn criterion_6() -> Outcome {
    let cfg = doubling_config(256, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = EvlParams {
        // a cell edge, so every calibrated ball is a union of whole cells
        center: 0.5,
        taus: vec![0.5, 1.0, 2.0],
        ns: vec![64],
        trials: 20_000,
        start: StartMode::Stationary,
        check_limit: false,
        oracle: true,
    };
    let out = run_evl(&setup, &p).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &out.rows {
        let e = &row.estimate;
        let exact = row.oracle.expect("oracle requested");
        let tol = three_sigma(exact, e.trials);
        pass &= (e.p_hat - exact).abs() <= tol;
        parts.push(format!(
            "tau={}: p_hat={:.5} taboo={exact:.5} tol={tol:.5}",
            e.tau, e.p_hat
        ));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let cfg = doubling_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = HtsParams {
        center: 0.3,
        mass: 1e-3,
        samples: 5000,
    };
    let out = run_hts(&setup, &p).unwrap();
    let pass = out.hts.ks_d < 0.03
        && out.rts.ks_d < 0.03
        && (0.95..=1.05).contains(&out.kac.product)
        && out.reconstruction_distance <= 0.04
        && out.hits.is_valid()
        && out.returns.is_valid();
    outcome(
        pass,
        format!(
            "mass={:.3e}: KS D(HTS)={:.4}, D(RTS)={:.4} (< 0.03); Kac={:.4}+-{:.4} (in [0.95,1.05]); \
             reconstruction sup-distance={:.4} (<= 0.04); censored {}+{}",
            out.ball.mass,
            out.hts.ks_d,
            out.rts.ks_d,
            out.kac.product,
            out.kac.se,
            out.reconstruction_distance,
            out.hits.censored,
            out.returns.censored
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = doubling_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = ReppParams {
        center: 0.3,
        tau: 1.0,
        n: 1000,
        windows: 10_000,
        trajectories: 10,
        start: StartMode::Stationary,
    };
    let t = run_repp(&setup, &p).unwrap().tests;
    let pass = t.windows >= 2000 && (0.9..=1.1).contains(&t.dispersion) && t.chi2_pass && t.ks_pass;
    outcome(
        pass,
        format!(
            "{} windows (>= 2000); dispersion={:.4} (in [0.9,1.1]); chi2 p={:.4}; gaps KS p={:.4} (both > 0.01)",
            t.windows, t.dispersion, t.chi2_p, t.ks_p
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = doubling_config(512, "kind = \"markov\"");
    let setup = Setup::new(&cfg).unwrap();
    let p = DPrimeParams {
        center: 0.3,
        tau: 1.0,
        ns: vec![1000, 10_000],
        trials: 20_000,
        k_n: None,
        start: StartMode::Stationary,
    };
    let out = run_dprime(&setup, &p).unwrap();
    let (a, b) = (&out.estimates[0], &out.estimates[1]);
    let decrease = b.s_hat < a.s_hat / 2.0;
    let bounded = out.estimates.iter().all(|e| e.s_hat <= e.bound + 3.0 * e.se);
    outcome(
        decrease && bounded,
        format!(
            "S(1e3)={:.5}+-{:.5} bound {:.5}; S(1e4)={:.5}+-{:.5} bound {:.5}; S(1e4) < S(1e3)/2: {decrease}",
            a.s_hat, a.se, a.bound, b.s_hat, b.se, b.bound
        ),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_raremap");
    let configs_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut configs: Vec<PathBuf> = std::fs::read_dir(&configs_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    let scratch = tempfile::tempdir().unwrap();
    let mut pass = !configs.is_empty();
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for cfg in &configs {
        let name = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let runs: Vec<Vec<(String, Vec<u8>)>> = [1usize, 4]
            .iter()
            .map(|threads| {
                let out = scratch.path().join(format!("{name}-{threads}"));
                Command::new(bin)
                    .arg("run")
                    .arg(cfg)
                    .arg("--threads")
                    .arg(threads.to_string())
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .unwrap();
                csv_files(&out)
            })
            .collect();
        if runs[0].is_empty() || runs[0] != runs[1] {
            pass = false;
            mismatched.push(name);
        } else {
            compared += runs[0].len();
        }
    }
    outcome(
        pass,
        format!(
            "{} configs run with --threads 1 and 4: {compared} CSV files byte-identical; mismatched: {:?}",
            configs.len(),
            mismatched
        ),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("stationary uniformity", criterion_1),
        ("uniform ergodicity", criterion_2),
        ("Doeblin margin", criterion_3),
        ("correlation decay", criterion_4),
        ("extreme value law", criterion_5),
        ("taboo oracle equivalence", criterion_6),
        ("hitting/return time statistics", criterion_7),
        ("rare event point process", criterion_8),
        ("anti-clustering statistic", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
