//! Experiment drivers. Each turns a [`RunConfig`] into a results table,
//! per-check verdicts and the list of seeds it consumed.

use dklab_core::duality::{run_duality_test_with, DualityConfig, Z_THRESHOLD};
use dklab_core::particles::{integer_alpha, MartingaleExperiment};
use dklab_core::pgf::{
    build_g, extract_coefficients_limit, mass_probe, monte_carlo_pgf, series_from_h, verdict_from_expansion,
    InitialMeasure, IntervalSet, LimitGrid, OccupationFunction, PgfExpansion, Verdict,
};
use dklab_core::rng::derive_seed;
use dklab_core::spde::BreakdownEnsemble;
use dklab_core::vhj::{check_extremum_principles, check_gradient_estimate, residual_refinement};
use dklab_core::{cole_hopf, EmpiricalMeasure, FourierFunction, RngStream, TorusDomain};
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, FunctionSpec, PgfMethod, RunConfig, MIN_DUALITY_REPLICATES};
use crate::error::Result;
use crate::table::{int, num, Table};

/// Smallest observed time order accepted by `vhj-check`.
pub const MIN_TIME_ORDER: f64 = 1.9;
/// Significance level of the Monte Carlo histogram test.
pub const CHI_SQUARE_LEVEL: f64 = 0.001;
/// Centre of the arcs used by the pgf mass probe.
pub const PROBE_CENTER: f64 = 0.5;

pub const DUALITY_COLUMNS: &[&str] = &["alpha", "t", "f_id", "mc_mean", "mc_stderr", "rhs", "z", "verdict"];
pub const MARTINGALE_COLUMNS: &[&str] = &[
    "alpha",
    "t",
    "phi_id",
    "replicates",
    "mean_m",
    "stderr_m",
    "z_m",
    "mean_m_sq",
    "mean_qv",
    "stderr_diff",
    "z_qv",
    "verdict",
];
pub const PGF_COLUMNS: &[&str] = &["kind", "k", "value", "detail"];
pub const BREAKDOWN_COLUMNS: &[&str] = &["member", "first_negative_step", "cell", "value"];
pub const VHJ_COLUMNS: &[&str] = &[
    "f_id",
    "alpha",
    "t",
    "min_order",
    "inf_f",
    "inf_v",
    "sup_v",
    "sup_f",
    "max_gamma_v",
    "gradient_bound",
    "verdict",
];

pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Duality => DUALITY_COLUMNS,
        Experiment::Martingale => MARTINGALE_COLUMNS,
        Experiment::Pgf => PGF_COLUMNS,
        Experiment::Breakdown => BREAKDOWN_COLUMNS,
        Experiment::VhjCheck => VHJ_COLUMNS,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckVerdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub label: String,
    #[serde(with = "crate::config::seed_format")]
    pub seed: u64,
    pub streams: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub verdicts: Vec<CheckVerdict>,
    pub seeds: Vec<SeedRecord>,
}

impl Outcome {
    fn new(e: Experiment) -> Self {
        Self {
            table: Table::new(columns(e)),
            verdicts: Vec::new(),
            seeds: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    fn verdict(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(CheckVerdict {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn seed(&mut self, label: impl Into<String>, seed: u64, streams: impl Into<String>) {
        self.seeds.push(SeedRecord {
            label: label.into(),
            seed,
            streams: streams.into(),
        });
    }
}

const PARTICLE_STREAMS: &str = "replicate r, particle i -> stream r*2^32+i";

pub fn run_experiment(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Duality => duality(cfg),
        Experiment::Martingale => martingale(cfg),
        Experiment::Pgf => pgf(cfg),
        Experiment::Breakdown => breakdown(cfg),
        Experiment::VhjCheck => vhj_check(cfg),
    }
}

fn particle_measure(cfg: &RunConfig) -> Result<EmpiricalMeasure> {
    let atoms = cfg.mu0.uniform_atoms().expect("validated").to_vec();
    Ok(EmpiricalMeasure::new(atoms)?)
}

/// Function `i` of the configured list uses seed `derive_seed(seed, i)`.
fn duality(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment);
    let mu0 = particle_measure(cfg)?;
    let dc = DualityConfig {
        grid_size: cfg.grid,
        antithetic: true,
        min_replicates: MIN_DUALITY_REPLICATES,
    };
    for (i, spec) in cfg.functions.iter().enumerate() {
        let seed = derive_seed(cfg.seed, i as u64);
        let r = run_duality_test_with(cfg.alpha, &mu0, &spec.to_fourier(), cfg.t, cfg.replicates, seed, &dc)?;
        let verdict = if r.passed { "pass" } else { "fail" };
        out.table.push(vec![
            int(r.alpha as u64),
            num(r.t),
            spec.id.clone(),
            num(r.mc_mean),
            num(r.mc_stderr),
            num(r.rhs),
            num(r.z_score),
            verdict.into(),
        ]);
        out.verdict(
            format!("duality/{}", spec.id),
            r.passed,
            format!("|z| = {} against {Z_THRESHOLD}", num(r.z_score.abs())),
        );
        out.seed(
            format!("duality/{}", spec.id),
            seed,
            format!("{PARTICLE_STREAMS}; antithetic partner reuses the stream"),
        );
    }
    Ok(out)
}

fn martingale(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment);
    let mu0 = particle_measure(cfg)?;
    for (i, spec) in cfg.functions.iter().enumerate() {
        let seed = derive_seed(cfg.seed, i as u64);
        let exp = MartingaleExperiment {
            mu0: mu0.clone(),
            alpha: cfg.alpha,
            phi: spec.to_fourier(),
            t_final: cfg.t,
            num_steps: cfg.steps,
            replicates: cfg.replicates,
            seed,
            checkpoints: vec![cfg.steps / 2],
        };
        for r in exp.run()? {
            let passed = r.z_m.abs() <= Z_THRESHOLD && r.z_qv.abs() <= Z_THRESHOLD;
            out.table.push(vec![
                int(integer_alpha(cfg.alpha)? as u64),
                num(r.time),
                spec.id.clone(),
                int(r.replicates as u64),
                num(r.mean_m),
                num(r.stderr_m),
                num(r.z_m),
                num(r.mean_m_sq),
                num(r.mean_qv),
                num(r.stderr_diff),
                num(r.z_qv),
                if passed { "pass" } else { "fail" }.into(),
            ]);
            out.verdict(
                format!("martingale/{}/t={}", spec.id, num(r.time)),
                passed,
                format!("z_m = {}, z_qv = {}", num(r.z_m), num(r.z_qv)),
            );
        }
        out.seed(format!("martingale/{}", spec.id), seed, PARTICLE_STREAMS);
    }
    Ok(out)
}

fn initial_measure(cfg: &RunConfig) -> Result<InitialMeasure> {
    Ok(match (cfg.mu0.weighted_atoms(), &cfg.mu0.density) {
        (Some(atoms), _) => InitialMeasure::Atoms(atoms?),
        (None, Some(d)) => InitialMeasure::Density(d.to_fourier()),
        (None, None) => unreachable!("validated"),
    })
}

/// `μ₀` is `(1/n) Σ δ_{x_i}` with `n = α`, the only case admitting a solution.
fn is_particle_case(cfg: &RunConfig) -> Option<usize> {
    let n = integer_alpha(cfg.alpha).ok()?;
    let atoms = cfg.mu0.uniform_atoms()?;
    (atoms.len() == n).then_some(n)
}

fn pgf(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment);
    let dom = TorusDomain::new(cfg.grid)?;
    let arcs: Vec<(f64, f64)> = cfg.set.iter().map(|a| (a[0], a[1])).collect();
    let occ = OccupationFunction::new(IntervalSet::new(&arcs)?, cfg.t, cfg.alpha, dom)?;
    let mu0 = initial_measure(cfg)?;
    let g = build_g(cfg.alpha, &mu0, &occ)?;

    let positions: Vec<f64> = match &mu0 {
        InitialMeasure::Atoms(a) => a.positions().to_vec(),
        InitialMeasure::Density(_) => {
            let dx = dom.spacing();
            dom.points().iter().map(|x| x + 0.5 * dx).collect()
        }
    };
    for (i, (h, x)) in g.h.iter().zip(&positions).enumerate() {
        out.table
            .push(vec!["h".into(), int(i as u64), num(*h), format!("x={}", num(*x))]);
    }

    let expansion: PgfExpansion = match cfg.method {
        PgfMethod::Series => series_from_h(cfg.alpha, &g.weights, &g.h, cfg.order)?,
        PgfMethod::Limit => extract_coefficients_limit(&g, cfg.order, &LimitGrid::for_function(&g))?,
    };
    for (k, p) in expansion.coefficients.iter().enumerate() {
        let detail = match &expansion.uncertainty {
            Some(u) => format!("{} err={}", expansion.method.name(), num(u[k])),
            None => expansion.method.name().to_string(),
        };
        out.table.push(vec!["p".into(), int(k as u64), num(*p), detail]);
    }
    if let Some(d) = &expansion.divergence {
        let ratio = match d.evidence.as_slice() {
            [.., a, b] if a.1 != 0.0 => b.1 / a.1,
            _ => f64::NAN,
        };
        out.table.push(vec![
            "divergence".into(),
            int(d.order as u64),
            num(ratio),
            format!("points={}", d.evidence.len()),
        ]);
    }

    if !cfg.coverages.is_empty() {
        let probe = mass_probe(cfg.alpha, &mu0, PROBE_CENTER, &cfg.coverages, cfg.t, dom)?;
        for (i, row) in probe.rows.iter().enumerate() {
            out.table.push(vec![
                "slope".into(),
                int(i as u64),
                num(row.slope),
                format!("coverage={}", num(row.coverage)),
            ]);
        }
    }

    let particle_case = is_particle_case(cfg);
    if let (Some(_), true) = (particle_case, cfg.replicates > 0) {
        let mu = EmpiricalMeasure::new(cfg.mu0.uniform_atoms().expect("checked").to_vec())?;
        let mc = monte_carlo_pgf(cfg.alpha, &mu, &occ, cfg.replicates, cfg.seed)?;
        let total = mc.replicates as f64;
        for (k, &c) in mc.counts.iter().enumerate() {
            out.table
                .push(vec!["mc".into(), int(k as u64), num(c as f64 / total), format!("count={c}")]);
        }
        let chi = mc.chi_square;
        out.table.push(vec![
            "chi2".into(),
            int(chi.dof as u64),
            num(chi.statistic),
            format!("p_value={}", num(chi.p_value)),
        ]);
        out.verdict(
            "pgf/chi-square",
            chi.p_value > CHI_SQUARE_LEVEL,
            format!("p = {} at level {CHI_SQUARE_LEVEL}", num(chi.p_value)),
        );
        out.verdict(
            "pgf/integer-samples",
            mc.all_integer,
            "every sample of alpha*mu_t(A) in {0..alpha}",
        );
        out.seed("pgf/monte-carlo", cfg.seed, PARTICLE_STREAMS);
    }

    let verdict = verdict_from_expansion(cfg.alpha, &expansion, cfg.order);
    let (k, value) = match verdict {
        Verdict::ConsistentInteger => (cfg.order, expansion.total()),
        Verdict::ViolatesNonnegativity { order, value } => (order, value),
        Verdict::ViolatesTaylor { order, .. } => (order, f64::NAN),
        Verdict::ViolatesTotalMass { mass, .. } => (cfg.order, mass),
    };
    out.table
        .push(vec!["verdict".into(), int(k as u64), num(value), verdict.label().into()]);
    let expected = particle_case.is_some();
    out.verdict(
        "pgf/atomicity",
        verdict.is_consistent() == expected,
        format!(
            "{verdict}; expected {}",
            if expected { "consistent-integer" } else { "a violation" }
        ),
    );
    Ok(out)
}

fn breakdown(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment);
    let ensemble = BreakdownEnsemble {
        alpha: cfg.alpha,
        grid_size: cfg.grid,
        dt_fraction: cfg.dt_fraction,
        noise_scale: cfg.noise_scale,
        max_steps: cfg.steps,
        members: cfg.replicates,
        seed: cfg.seed,
    };
    let rho = cfg.mu0.density.as_ref().expect("validated").to_fourier();
    let report = ensemble.run_from(&rho)?;
    for (m, o) in report.outcomes.iter().enumerate() {
        let row = match o {
            Some(n) => vec![int(m as u64), int(n.step as u64), int(n.cell as u64), num(n.value)],
            None => vec![int(m as u64), String::new(), String::new(), String::new()],
        };
        out.table.push(row);
    }
    let hits = report.hits();
    let required = (cfg.min_hit_fraction * cfg.replicates as f64).ceil() as usize;
    out.verdict(
        "breakdown/hits",
        hits >= required,
        format!(
            "{hits}/{} members negative within {} steps (need {required}); dt = {}; median step {}",
            cfg.replicates,
            cfg.steps,
            num(report.dt),
            num(report.median_step(cfg.steps))
        ),
    );
    out.seed("breakdown", cfg.seed, "member m -> stream m*2^32");
    Ok(out)
}

/// Random trigonometric polynomial with up to five modes.
pub fn random_function(rng: &mut RngStream) -> FourierFunction {
    let modes = 1 + (rng.uniform() * 5.0) as usize;
    let amp = 0.2 + 2.0 * rng.uniform();
    let mean = 4.0 * rng.uniform() - 2.0;
    let cos = (0..modes).map(|k| amp * (rng.uniform() - 0.5) / (k + 1) as f64).collect();
    let sin = (0..modes).map(|k| amp * (rng.uniform() - 0.5) / (k + 1) as f64).collect();
    FourierFunction::new(mean, cos, sin)
}

fn vhj_check(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment);
    let dom = TorusDomain::new(cfg.grid)?;
    let mut suite: Vec<(String, FourierFunction)> =
        cfg.functions.iter().map(|f: &FunctionSpec| (f.id.clone(), f.to_fourier())).collect();
    let mut rng = RngStream::new(cfg.seed, 0);
    suite.extend((0..cfg.random_functions).map(|i| (format!("random{i:03}"), random_function(&mut rng))));
    if cfg.random_functions > 0 {
        out.seed("vhj-check/random-suite", cfg.seed, "stream 0");
    }

    for (id, f) in &suite {
        let field = cole_hopf(&dom, f, cfg.alpha, cfg.t)?;
        let ext = check_extremum_principles(&field);
        let grad = check_gradient_estimate(&field);
        let order = if f.is_constant() {
            f64::NAN
        } else {
            residual_refinement(&dom, f, cfg.alpha, cfg.t, cfg.dt0, cfg.levels)?.min_order()
        };
        let order_ok = order.is_nan() || order >= MIN_TIME_ORDER;
        let passed = order_ok && ext.holds() && grad.holds && grad.intermediate_holds;
        out.table.push(vec![
            id.clone(),
            num(cfg.alpha),
            num(cfg.t),
            num(order),
            num(ext.inf_f),
            num(ext.inf_v),
            num(ext.sup_v),
            num(ext.sup_f),
            num(grad.max_gamma_v),
            num(grad.bound),
            if passed { "pass" } else { "fail" }.into(),
        ]);
        if !passed {
            out.verdict(
                format!("vhj-check/{id}"),
                false,
                format!(
                    "order {} extremum {} gradient {} intermediate {}",
                    num(order),
                    ext.holds(),
                    grad.holds,
                    grad.intermediate_holds
                ),
            );
        }
    }
    let failed = out.verdicts.len();
    out.verdict(
        "vhj-check/suite",
        failed == 0,
        format!("{} of {} functions pass", suite.len() - failed, suite.len()),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn cfg(e: Experiment, alpha: f64, replicates: Option<usize>) -> RunConfig {
        RunConfig::resolve(
            e,
            None,
            &Overrides {
                alpha: Some(alpha),
                replicates,
                ..Overrides::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn duality_table_schema() {
        let out = run_experiment(&cfg(Experiment::Duality, 2.0, Some(10_000))).unwrap();
        let csv = out.table.to_csv();
        assert!(csv.starts_with("alpha,t,f_id,mc_mean,mc_stderr,rhs,z,verdict\n"));
        assert_eq!(out.table.rows().len(), 3);
        assert_eq!(out.seeds.len(), 3);
        assert_eq!(out.table.rows()[0][0], "2");
    }

    #[test]
    fn pgf_non_integer_reports_violation() {
        let mut c = cfg(Experiment::Pgf, 1.5, None);
        c.coverages = vec![0.5, 0.99];
        let out = run_experiment(&c).unwrap();
        let last = out.table.rows().last().unwrap();
        assert_eq!(last[0], "verdict");
        assert_eq!(last[3], "violates-nonnegativity");
        assert!(out.passed());
        assert!(out.table.rows().iter().any(|r| r[0] == "slope"));
        assert!(!out.table.rows().iter().any(|r| r[0] == "mc"));
    }

    #[test]
    fn pgf_integer_case_runs_monte_carlo() {
        let out = run_experiment(&cfg(Experiment::Pgf, 2.0, Some(20_000))).unwrap();
        let rows = out.table.rows();
        assert_eq!(rows.iter().filter(|r| r[0] == "mc").count(), 3);
        assert_eq!(rows.last().unwrap()[3], "consistent-integer");
        assert!(out.verdicts.iter().any(|v| v.name == "pgf/chi-square"));
    }

    #[test]
    fn pgf_limit_method() {
        let mut c = cfg(Experiment::Pgf, 2.0, Some(0));
        c.method = PgfMethod::Limit;
        c.order = 5;
        let out = run_experiment(&c).unwrap();
        let p: Vec<&Vec<String>> = out.table.rows().iter().filter(|r| r[0] == "p").collect();
        assert_eq!(p.len(), 6);
        assert!(p[0][3].starts_with("limit-extraction err="));
        assert!(out.passed());
    }

    #[test]
    fn breakdown_small_ensemble() {
        let mut c = cfg(Experiment::Breakdown, 1.5, Some(10));
        c.grid = 64;
        c.steps = 100;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.table.rows().len(), 10);
        assert!(out.passed(), "{:?}", out.verdicts);
    }

    #[test]
    fn vhj_check_small_suite() {
        let mut c = cfg(Experiment::VhjCheck, 1.0, None);
        c.grid = 64;
        c.random_functions = 3;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.table.rows().len(), 6);
        assert!(out.passed(), "{:?}", out.verdicts);
    }

    #[test]
    fn martingale_rows_per_checkpoint() {
        let mut c = cfg(Experiment::Martingale, 1.0, Some(2000));
        c.steps = 20;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.table.rows().len(), 4);
        assert_eq!(out.table.rows()[0][2], "cos1");
    }

    #[test]
    fn random_functions_are_reproducible() {
        let a = random_function(&mut RngStream::new(4, 0));
        let b = random_function(&mut RngStream::new(4, 0));
        assert_eq!(a, b);
    }
}
