//! Monte Carlo check of the Laplace duality
//! `E e^{−⟨μ_t, f⟩} = e^{−⟨μ₀, V_t f⟩}`
//! between the particle solution and the Cole-Hopf semigroup.

use crate::error::{require, Result};
use crate::fourier::FourierFunction;
use crate::particles::{particle_count, sample_marginal, EmpiricalMeasure};
use crate::rng::{derive_seed, RngStream};
use crate::stats::{par_map_ordered, Summary};
use crate::torus::TorusDomain;
use crate::vhj::cole_hopf;

/// Significance threshold in standard errors.
pub const Z_THRESHOLD: f64 = 3.0;

/// Absolute numerical tolerance attributed to the right-hand side; it is
/// added in quadrature to the Monte Carlo error so that zero-variance
/// cases (t = 0, constant f) compare exactly up to round-off.
pub const RHS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DualityConfig {
    pub grid_size: usize,
    /// Average each replicate with its sign-flipped partner.
    pub antithetic: bool,
    pub min_replicates: usize,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self {
            grid_size: 256,
            antithetic: true,
            min_replicates: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub alpha: usize,
    pub mu0: EmpiricalMeasure,
    pub f: FourierFunction,
    pub t: f64,
    pub replicates: usize,
    pub seed: u64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    /// `e^{−⟨μ₀, V_t f⟩}`.
    pub rhs: f64,
    pub z_score: f64,
    pub passed: bool,
}

/// Estimates `E e^{−⟨μ_t,f⟩}` over `replicates` independent particle
/// solutions and compares it with the Cole-Hopf right-hand side.
pub fn run_duality_test(
    alpha: f64,
    mu0: &EmpiricalMeasure,
    f: &FourierFunction,
    t: f64,
    replicates: usize,
    seed: u64,
) -> Result<DualityReport> {
    run_duality_test_with(alpha, mu0, f, t, replicates, seed, &DualityConfig::default())
}

pub fn run_duality_test_with(
    alpha: f64,
    mu0: &EmpiricalMeasure,
    f: &FourierFunction,
    t: f64,
    replicates: usize,
    seed: u64,
    config: &DualityConfig,
) -> Result<DualityReport> {
    let n = particle_count(alpha, mu0)?;
    require(t >= 0.0 && t.is_finite(), "t", "finite and nonnegative", t)?;
    if replicates < config.min_replicates {
        return Err(crate::Error::TooFew {
            what: "replicates",
            required: config.min_replicates,
            got: replicates,
        });
    }

    let values: Vec<f64> = par_map_ordered(replicates, |r| {
        let stream = RngStream::replicate(seed, r as u32);
        let laplace = |antithetic| {
            sample_marginal(mu0, alpha, t, &stream, antithetic).map(|mu| (-mu.pair(f)).exp())
        };
        if config.antithetic {
            0.5 * (laplace(false).expect("validated") + laplace(true).expect("validated"))
        } else {
            laplace(false).expect("validated")
        }
    });
    let summary = Summary::of(&values);

    let dom = TorusDomain::new(config.grid_size)?;
    let field = cole_hopf(&dom, f, n as f64, t)?;
    let paired = mu0.positions().iter().map(|&x| field.value_at(x)).sum::<f64>() / n as f64;
    let rhs = (-paired).exp();

    let z_score = (summary.mean - rhs) / (summary.stderr.powi(2) + RHS_TOLERANCE.powi(2)).sqrt();
    Ok(DualityReport {
        alpha: n,
        mu0: mu0.clone(),
        f: f.clone(),
        t,
        replicates,
        seed,
        mc_mean: summary.mean,
        mc_stderr: summary.stderr,
        rhs,
        z_score,
        passed: z_score.abs() <= Z_THRESHOLD,
    })
}

/// A labelled test function for sweeps and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    pub f: FourierFunction,
}

impl TestFunction {
    pub fn new(id: impl Into<String>, f: FourierFunction) -> Self {
        Self { id: id.into(), f }
    }

    /// Three nonnegative test functions used by the default sweep.
    pub fn default_suite() -> Vec<Self> {
        vec![
            Self::new("f1", FourierFunction::new(1.0, vec![0.5], vec![])),
            Self::new("f2", FourierFunction::new(0.8, vec![0.0, 0.2], vec![0.3])),
            Self::new("f3", FourierFunction::new(2.0, vec![1.0, 0.0, 0.4], vec![0.0, -0.3])),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub f_id: String,
    pub report: DualityReport,
}

/// Runs the duality test over `alphas × times × functions`, in that
/// nesting order. Cell `c` uses seed `derive_seed(seed, c)` and the initial
/// measure with `α` equispaced atoms.
pub fn sweep(
    alphas: &[f64],
    times: &[f64],
    functions: &[TestFunction],
    replicates: usize,
    seed: u64,
    config: &DualityConfig,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * times.len() * functions.len());
    let mut cell = 0u64;
    for &alpha in alphas {
        let n = crate::particles::integer_alpha(alpha)?;
        let mu0 = EmpiricalMeasure::equispaced(n)?;
        for &t in times {
            for tf in functions {
                let report = run_duality_test_with(alpha, &mu0, &tf.f, t, replicates, derive_seed(seed, cell), config)?;
                rows.push(SweepRow {
                    f_id: tf.id.clone(),
                    report,
                });
                cell += 1;
            }
        }
    }
    Ok(rows)
}

pub fn pass_count(rows: &[SweepRow]) -> usize {
    rows.iter().filter(|r| r.report.passed).count()
}
