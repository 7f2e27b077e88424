use dklab_core::duality::{run_duality_test, run_duality_test_with, sweep, DualityConfig, TestFunction};
use dklab_core::particles::sample_marginal;
use dklab_core::stats::{par_map_ordered, Summary};
use dklab_core::{EmpiricalMeasure, FourierFunction, RngStream};

/// Wrapped Gaussian density with mean `m` and variance `var` on the torus.
fn wrapped_kernel(x: f64, m: f64, var: f64) -> f64 {
    let norm = 1.0 / (std::f64::consts::TAU * var).sqrt();
    (-20..=20)
        .map(|k| {
            let d = x - m + k as f64;
            norm * (-d * d / (2.0 * var)).exp()
        })
        .sum()
}

/// `∫ p_t(x0, y) e^{−f(y)} dy` by the periodic trapezoid rule.
fn kernel_quadrature(f: &FourierFunction, x0: f64, var: f64) -> f64 {
    let m = 8192;
    (0..m)
        .map(|j| {
            let y = j as f64 / m as f64;
            wrapped_kernel(y, x0, var) * (-f.eval(y)).exp()
        })
        .sum::<f64>()
        / m as f64
}

#[test]
fn single_particle_matches_kernel_quadrature() {
    let mu = EmpiricalMeasure::dirac(0.5).unwrap();
    for tf in TestFunction::default_suite() {
        for t in [0.02, 0.1] {
            let oracle = kernel_quadrature(&tf.f, 0.5, t);
            let values: Vec<f64> = par_map_ordered(100_000, |r| {
                let m = sample_marginal(&mu, 1.0, t, &RngStream::replicate(31, r as u32), false).unwrap();
                (-m.pair(&tf.f)).exp()
            });
            let s = Summary::of(&values);
            assert!((s.mean - oracle).abs() <= 3.0 * s.stderr, "{} t = {t}: {} vs {oracle}", tf.id, s.mean);
        }
    }
}

#[test]
fn right_hand_side_matches_kernel_quadrature() {
    // For one particle e^{−V_t f(x)} = P_t e^{−f}(x) with P_t of ½Δ.
    let mu = EmpiricalMeasure::dirac(0.5).unwrap();
    let f = FourierFunction::new(1.0, vec![0.5], vec![0.2]);
    let cfg = DualityConfig {
        min_replicates: 1,
        ..DualityConfig::default()
    };
    let r = run_duality_test_with(1.0, &mu, &f, 0.05, 10, 1, &cfg).unwrap();
    assert!((r.rhs - kernel_quadrature(&f, 0.5, 0.05)).abs() < 1e-12);
}

#[test]
fn two_particles_agree() {
    let mu = EmpiricalMeasure::new(vec![0.2, 0.6]).unwrap();
    let f = FourierFunction::new(0.8, vec![0.0, 0.2], vec![0.3]);
    let r = run_duality_test(2.0, &mu, &f, 0.05, 20_000, 8).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.mc_mean > 0.0 && r.mc_mean <= 1.0 && r.rhs > 0.0 && r.rhs <= 1.0);
}

#[test]
fn antithetic_and_plain_estimators_agree() {
    let mu = EmpiricalMeasure::equispaced(2).unwrap();
    let f = FourierFunction::new(2.0, vec![1.0, 0.0, 0.4], vec![0.0, -0.3]);
    let plain = DualityConfig {
        antithetic: false,
        ..DualityConfig::default()
    };
    let a = run_duality_test(2.0, &mu, &f, 0.05, 20_000, 3).unwrap();
    let b = run_duality_test_with(2.0, &mu, &f, 0.05, 20_000, 3, &plain).unwrap();
    let z = (a.mc_mean - b.mc_mean) / (a.mc_stderr.powi(2) + b.mc_stderr.powi(2)).sqrt();
    assert!(z.abs() < 4.0);
    assert!(b.passed);
}

#[test]
fn signed_test_function() {
    let mu = EmpiricalMeasure::equispaced(3).unwrap();
    let f = FourierFunction::new(-0.5, vec![1.0], vec![0.5]);
    let r = run_duality_test(3.0, &mu, &f, 0.02, 20_000, 44).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn small_sweep_layout() {
    let cfg = DualityConfig {
        min_replicates: 1,
        ..DualityConfig::default()
    };
    let rows = sweep(&[1.0, 2.0], &[0.05], &TestFunction::default_suite(), 2000, 5, &cfg).unwrap();
    assert_eq!(rows.len(), 6);
    let ids: Vec<&str> = rows.iter().map(|r| r.f_id.as_str()).collect();
    assert_eq!(ids, ["f1", "f2", "f3", "f1", "f2", "f3"]);
    assert_eq!(rows[3].report.alpha, 2);
    assert!(sweep(&[1.5], &[0.05], &TestFunction::default_suite(), 2000, 5, &cfg).is_err());
}
