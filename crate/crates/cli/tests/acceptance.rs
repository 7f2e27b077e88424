//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dklab_cli::config::{FunctionSpec, Mu0Spec, Overrides};
use dklab_cli::experiments::run_experiment;
use dklab_cli::{Experiment, RunConfig};
use dklab_core::duality::{pass_count, run_duality_test, sweep, DualityConfig, TestFunction};
use dklab_core::particles::MartingaleExperiment;
use dklab_core::pgf::{
    atomicity_verdict, extract_coefficients_limit, extract_coefficients_series, mass_probe, monte_carlo_pgf,
    series_from_h, verdict_from_expansion, InitialMeasure, IntervalSet, LimitGrid, OccupationFunction, PowerLaw,
    Verdict, WeightedAtoms,
};
use dklab_core::spde::BreakdownEnsemble;
use dklab_core::{EmpiricalMeasure, FourierFunction, TorusDomain};
use serde::Deserialize;

const Z_MAX: f64 = 3.0;
const REPLICATES: usize = 100_000;
const SWEEP_MIN_PASS: usize = 26;
const SWEEP_TIME_LIMIT: Duration = Duration::from_secs(300);
const MIN_TIME_ORDER: f64 = 1.9;
const POISSON_BINOMIAL_TOL: f64 = 1e-10;
const CHI_SQUARE_LEVEL: f64 = 0.001;
const NEGATIVITY_MAX_ORDER: usize = 5;
const SLOPE_TOL: f64 = 0.05;
const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Wrapped Gaussian density on the unit torus.
fn wrapped_kernel(x: f64, mean: f64, var: f64) -> f64 {
    let norm = 1.0 / (std::f64::consts::TAU * var).sqrt();
    (-20..=20)
        .map(|k| {
            let d = x - mean + k as f64;
            norm * (-d * d / (2.0 * var)).exp()
        })
        .sum()
}

/// `∫ p_t(x0, y) e^{−f(y)} dy` by the periodic trapezoid rule.
fn heat_kernel_quadrature(f: &FourierFunction, x0: f64, var: f64) -> f64 {
    let m = 8192;
    (0..m)
        .map(|j| {
            let y = j as f64 / m as f64;
            wrapped_kernel(y, x0, var) * (-f.eval(y)).exp()
        })
        .sum::<f64>()
        / m as f64
}

/// Law of a sum of independent Bernoulli(h_i) by dynamic programming.
fn poisson_binomial_oracle(h: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &q in h {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &v) in p.iter().enumerate() {
            next[k] += v * (1.0 - q);
            next[k + 1] += v * q;
        }
        p = next;
    }
    p
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rows = match sweep(
        &[1.0, 2.0, 5.0],
        &[0.02, 0.05, 0.1],
        &TestFunction::default_suite(),
        REPLICATES,
        SEED,
        &DualityConfig::default(),
    ) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let passed = pass_count(&rows);
    let worst = rows.iter().map(|r| r.report.z_score.abs()).fold(0.0, f64::max);
    outcome(
        rows.len() == 27 && passed >= SWEEP_MIN_PASS && elapsed <= SWEEP_TIME_LIMIT,
        format!(
            "{passed}/{} cells with |z| <= {Z_MAX} (need {SWEEP_MIN_PASS}), max |z| {worst:.2}, {:.1} s (limit {} s)",
            rows.len(),
            elapsed.as_secs_f64(),
            SWEEP_TIME_LIMIT.as_secs()
        ),
    )
}

fn criterion_2() -> Outcome {
    let f = FourierFunction::new(1.0, vec![0.5], vec![]);
    let mu = EmpiricalMeasure::dirac(0.5).unwrap();
    let t = 0.05;
    let r = run_duality_test(1.0, &mu, &f, t, REPLICATES, SEED + 2).unwrap();
    let oracle = heat_kernel_quadrature(&f, 0.5, t);
    let z = (r.mc_mean - oracle) / r.mc_stderr;
    outcome(
        z.abs() <= Z_MAX,
        format!("MC {:.6} ± {:.1e} vs wrapped-kernel quadrature {oracle:.6}, z = {z:.2}", r.mc_mean, r.mc_stderr),
    )
}

fn criterion_3() -> Outcome {
    let cases = [
        (1usize, vec![0.25], FourierFunction::cosine(1, 1.0), 0.05, 100),
        (2, vec![0.1, 0.6], FourierFunction::new(0.0, vec![0.3], vec![0.0, 0.0, 0.2]), 0.05, 100),
        (3, vec![0.0, 0.3, 0.7], FourierFunction::sine(2, 0.5), 0.1, 100),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (n, atoms, phi, t, steps)) in cases.into_iter().enumerate() {
        let exp = MartingaleExperiment {
            mu0: EmpiricalMeasure::new(atoms).unwrap(),
            alpha: n as f64,
            phi,
            t_final: t,
            num_steps: steps,
            replicates: REPLICATES,
            seed: SEED + 3 + i as u64,
            checkpoints: vec![],
        };
        let r = exp.run().unwrap().pop().unwrap();
        ok &= r.z_m.abs() <= Z_MAX && r.z_qv.abs() <= Z_MAX;
        parts.push(format!("n={n} t={t}: z_M {:.2}, z_QV {:.2}", r.z_m, r.z_qv));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let cfg = RunConfig::resolve(
            Experiment::VhjCheck,
            None,
            &Overrides {
                alpha: Some(alpha),
                grid: Some(128),
                seed: Some(SEED),
                ..Overrides::default()
            },
        )
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        let rows = out.table.rows();
        let min_order = rows
            .iter()
            .filter_map(|r| r[3].parse::<f64>().ok())
            .fold(f64::INFINITY, f64::min);
        let passing = rows.iter().filter(|r| r[10] == "pass").count();
        ok &= out.passed() && min_order >= MIN_TIME_ORDER && rows.len() == 53;
        parts.push(format!("alpha={alpha}: {passing}/{} pass, min order {min_order:.3}", rows.len()));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let set = IntervalSet::new(&[(0.05, 0.3), (0.55, 0.7)]).unwrap();
    let dom = TorusDomain::new(256).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3usize {
        let atoms: Vec<f64> = (0..n).map(|i| 0.1 + 0.8 * i as f64 / n.max(2) as f64).collect();
        let occ = OccupationFunction::new(set.clone(), 0.02, n as f64, dom).unwrap();
        let oracle = poisson_binomial_oracle(&atoms.iter().map(|&x| occ.h_at(x)).collect::<Vec<_>>());
        let e = extract_coefficients_series(n as f64, &WeightedAtoms::uniform(atoms.clone()).unwrap(), &occ, 10)
            .unwrap();
        let err = (0..=10)
            .map(|k| (e.coefficients[k] - oracle.get(k).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max);
        let mc = monte_carlo_pgf(n as f64, &EmpiricalMeasure::new(atoms).unwrap(), &occ, REPLICATES, SEED + n as u64)
            .unwrap();
        ok &= err <= POISSON_BINOMIAL_TOL && mc.chi_square.p_value > CHI_SQUARE_LEVEL && mc.all_integer;
        parts.push(format!(
            "alpha={n}: max |p_k - oracle| {err:.1e}, chi2 p {:.3}, integer {}",
            mc.chi_square.p_value, mc.all_integer
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();

    let mut a = true;
    for i in 1..=9 {
        let e = series_from_h(1.5, &[1.0], &[i as f64 / 10.0], 10).unwrap();
        a &= matches!(
            verdict_from_expansion(1.5, &e, 10),
            Verdict::ViolatesNonnegativity { order, .. } if order <= NEGATIVITY_MAX_ORDER
        );
    }
    parts.push(format!("(a) {}", if a { "9/9 violate nonnegativity" } else { "missed" }));

    let e = extract_coefficients_limit(&PowerLaw { exponent: 1.5 }, 6, &LimitGrid::default()).unwrap();
    let div = e.divergence.as_ref().map(|d| d.order);
    let b = div == Some(2);
    parts.push(format!("(b) divergence at order {div:?}"));

    let dom = TorusDomain::new(256).unwrap();
    let set = IntervalSet::new(&[(0.05, 0.3), (0.55, 0.7)]).unwrap();
    let occ = OccupationFunction::new(set, 0.02, 1.0, dom).unwrap();
    let v = atomicity_verdict(1.0, &WeightedAtoms::uniform(vec![0.15, 0.6]).unwrap(), &occ, 10).unwrap();
    let c = !v.verdict.is_consistent();
    parts.push(format!("(c) {}", v.verdict.label()));

    let mu0 = InitialMeasure::Atoms(WeightedAtoms::uniform(vec![0.5]).unwrap());
    let probe = mass_probe(1.5, &mu0, 0.5, &[0.5, 0.9, 0.99], 0.01, dom).unwrap();
    let slope = probe.final_slope();
    let d = (slope - 1.5).abs() <= SLOPE_TOL;
    parts.push(format!("(d) slope {slope:.4} at coverage 0.99"));

    outcome(a && b && c && d, parts.join("; "))
}

#[derive(Deserialize)]
struct BreakdownFixture {
    alpha: f64,
    grid: usize,
    members: usize,
    max_steps: usize,
    seed: u64,
    half_bound: Threshold,
    quartered: Threshold,
}

#[derive(Deserialize)]
struct Threshold {
    dt_fraction: f64,
    min_hits: usize,
}

fn criterion_7() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/breakdown.toml");
    let fx: BreakdownFixture = toml::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, th) in [("dt = bound/2", &fx.half_bound), ("dt quartered", &fx.quartered)] {
        let report = BreakdownEnsemble {
            alpha: fx.alpha,
            grid_size: fx.grid,
            dt_fraction: th.dt_fraction,
            noise_scale: 1.0,
            max_steps: fx.max_steps,
            members: fx.members,
            seed: fx.seed,
        }
        .run()
        .unwrap();
        ok &= report.hits() >= th.min_hits;
        parts.push(format!(
            "{label}: {}/{} (need {}), median step {}",
            report.hits(),
            fx.members,
            th.min_hits,
            report.median_step(fx.max_steps)
        ));
    }
    outcome(ok, parts.join("; "))
}

fn small_configs(dir: &Path) -> Vec<RunConfig> {
    let o = |alpha: f64, replicates: Option<usize>, name: &str| Overrides {
        alpha: Some(alpha),
        replicates,
        seed: Some(SEED),
        output: Some(dir.join(name)),
        ..Overrides::default()
    };
    let mut duality = RunConfig::resolve(Experiment::Duality, None, &o(3.0, Some(20_000), "duality.csv")).unwrap();
    duality.functions.push(FunctionSpec::new("extra", 0.5, &[0.1, 0.1], &[0.2]));
    let mut martingale =
        RunConfig::resolve(Experiment::Martingale, None, &o(2.0, Some(5_000), "martingale.csv")).unwrap();
    martingale.steps = 40;
    let pgf = RunConfig::resolve(Experiment::Pgf, None, &o(3.0, Some(50_000), "pgf.csv")).unwrap();
    let mut pgf_fractional = RunConfig::resolve(Experiment::Pgf, None, &o(2.5, None, "pgf-frac.csv")).unwrap();
    pgf_fractional.mu0 = Mu0Spec::atoms(vec![0.2, 0.5]);
    pgf_fractional.coverages = vec![0.9];
    let mut breakdown = RunConfig::resolve(Experiment::Breakdown, None, &o(1.5, Some(20), "breakdown.csv")).unwrap();
    breakdown.noise_scale = 0.02;
    breakdown.grid = 64;
    breakdown.steps = 500;
    breakdown.min_hit_fraction = 0.0;
    let mut vhj = RunConfig::resolve(Experiment::VhjCheck, None, &o(1.0, None, "vhj.csv")).unwrap();
    vhj.random_functions = 10;
    vhj.grid = 64;
    vec![duality, martingale, pgf, pgf_fractional, breakdown, vhj]
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_dklab"));
    let mut ok = true;
    let mut replays = 0;
    let mut failures = Vec::new();
    for cfg in small_configs(dir.path()) {
        let stem = cfg.output.file_stem().unwrap().to_string_lossy().into_owned();
        let config_path = dir.path().join(format!("{stem}.toml"));
        std::fs::write(&config_path, cfg.to_toml()).unwrap();
        let status = Command::new(&bin)
            .arg(cfg.experiment.name())
            .arg("--config")
            .arg(&config_path)
            .env("DKLAB_THREADS", "1")
            .output()
            .unwrap()
            .status;
        if !matches!(status.code(), Some(0) | Some(2)) {
            ok = false;
            failures.push(format!("{stem}: run exited {status}"));
            continue;
        }
        let manifest = dklab_cli::manifest::manifest_path(&cfg.output);
        for threads in ["1", "4", "max"] {
            let o = Command::new(&bin)
                .arg("replay")
                .arg(&manifest)
                .env("DKLAB_THREADS", threads)
                .output()
                .unwrap();
            replays += 1;
            if o.status.code() != Some(0) {
                ok = false;
                failures.push(format!("{stem} threads={threads}: {}", String::from_utf8_lossy(&o.stdout).trim()));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{replays} replays byte-identical across DKLAB_THREADS in {{1, 4, max}}")
    } else {
        failures.join("; ")
    };
    outcome(ok, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("duality sweep", criterion_1),
        ("single-particle closed form", criterion_2),
        ("martingale and quadratic variation", criterion_3),
        ("Cole-Hopf correctness", criterion_4),
        ("generating function, integer case", criterion_5),
        ("non-existence witnesses", criterion_6),
        ("breakdown ensemble", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(run).unwrap_or_else(|_| outcome(false, "panicked"));
        if !r.passed {
            failed += 1;
        }
        println!(
            "{} criterion {} {name}: {} [{:.1} s]",
            if r.passed { "PASS" } else { "FAIL" },
            i + 1,
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
