//! Empirical-measure solutions of the measure-valued martingale problem.
//!
//! For integer `alpha = n` and `μ₀ = (1/n) Σ δ_{x_i}` the solution is
//! `μ_t = (1/n) Σ δ_{X^i_{nt}}` with independent Brownian particles of
//! generator `½Δ` run on an internal clock `n·t`. Brownian marginals are
//! sampled exactly, so the stored grid carries no time-stepping error.

use crate::error::{require, Error, Result};
use crate::fourier::{carre_du_champ, FourierFunction};
use crate::rng::RngStream;
use crate::stats::{par_map_ordered, Summary};
use crate::torus::wrap;

/// `(1/n) Σ δ_{x_i}` on the torus; atoms may repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    positions: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidMeasure("an empirical measure needs at least one atom".into()));
        }
        if let Some(x) = positions.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!("atom position {x} is not finite")));
        }
        Ok(Self {
            positions: positions.into_iter().map(wrap).collect(),
        })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    /// `n` atoms at `(i + ½) / n`.
    pub fn equispaced(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Always 1: weights are `1/n` by construction.
    pub fn total_mass(&self) -> f64 {
        self.pair(&FourierFunction::constant(1.0))
    }

    /// `⟨μ, φ⟩ = (1/n) Σ φ(x_i)`.
    pub fn pair(&self, phi: &FourierFunction) -> f64 {
        pair_positions(&self.positions, |x| phi.eval(x))
    }
}

/// `⟨μ, φ⟩` for an arbitrary evaluator.
pub fn pair_against(phi: &FourierFunction, mu: &EmpiricalMeasure) -> f64 {
    mu.pair(phi)
}

fn pair_positions(positions: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = positions.len() as f64;
    positions.iter().map(|&x| f(x)).sum::<f64>() / n
}

/// Checks `alpha` is a positive integer matching the atom count of `mu0`.
pub fn particle_count(alpha: f64, mu0: &EmpiricalMeasure) -> Result<usize> {
    let n = integer_alpha(alpha)?;
    if n != mu0.len() {
        return Err(Error::AtomCountMismatch { alpha: n, atoms: mu0.len() });
    }
    Ok(n)
}

/// Accepts only `alpha ∈ {1, 2, ...}`; no particle solution exists otherwise.
pub fn integer_alpha(alpha: f64) -> Result<usize> {
    if alpha.is_finite() && alpha >= 1.0 && alpha.fract() == 0.0 && alpha <= f64::from(u32::MAX) {
        Ok(alpha as usize)
    } else {
        Err(Error::NonIntegerAlpha(alpha))
    }
}

/// One sampled trajectory of the empirical measure on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlePath {
    alpha: usize,
    times: Vec<f64>,
    /// Row-major `(num_steps + 1) × n` torus positions.
    positions: Vec<f64>,
    /// Unwrapped displacement of each particle at the final time.
    displacements: Vec<f64>,
}

impl ParticlePath {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn num_states(&self) -> usize {
        self.times.len()
    }

    pub fn positions_at(&self, step: usize) -> &[f64] {
        &self.positions[step * self.alpha..(step + 1) * self.alpha]
    }

    pub fn state(&self, step: usize) -> EmpiricalMeasure {
        EmpiricalMeasure {
            positions: self.positions_at(step).to_vec(),
        }
    }

    pub fn states(&self) -> Vec<EmpiricalMeasure> {
        (0..self.num_states()).map(|k| self.state(k)).collect()
    }

    pub fn final_state(&self) -> EmpiricalMeasure {
        self.state(self.num_states() - 1)
    }

    /// Total unwrapped displacement `X^i_{nt} - x_i` per particle.
    pub fn displacements(&self) -> &[f64] {
        &self.displacements
    }
}

/// Samples the empirical-measure solution started at `mu0`.
///
/// Particle `i` draws from `stream.substream(i)`. Over a step of external
/// length `dt` each particle receives an exact `N(0, n·dt)` increment.
pub fn simulate_path(
    mu0: &EmpiricalMeasure,
    alpha: f64,
    t_final: f64,
    num_steps: usize,
    stream: &RngStream,
) -> Result<ParticlePath> {
    simulate_path_signed(mu0, alpha, t_final, num_steps, stream, false)
}

/// As [`simulate_path`], optionally negating every Gaussian increment
/// (the antithetic partner path, equal in law).
pub fn simulate_path_signed(
    mu0: &EmpiricalMeasure,
    alpha: f64,
    t_final: f64,
    num_steps: usize,
    stream: &RngStream,
    antithetic: bool,
) -> Result<ParticlePath> {
    let n = particle_count(alpha, mu0)?;
    require(t_final >= 0.0 && t_final.is_finite(), "t_final", "finite and nonnegative", t_final)?;
    require(num_steps >= 1, "num_steps", "at least 1", num_steps as f64)?;

    let dt = t_final / num_steps as f64;
    let sd = (n as f64 * dt).sqrt();
    let sign = if antithetic { -1.0 } else { 1.0 };
    let times = (0..=num_steps).map(|k| k as f64 * dt).collect();

    let mut positions = vec![0.0; (num_steps + 1) * n];
    let mut displacements = vec![0.0; n];
    for (i, &x0) in mu0.positions().iter().enumerate() {
        let mut rng = stream.substream(i as u32);
        let mut disp = 0.0;
        positions[i] = x0;
        for k in 1..=num_steps {
            if sd > 0.0 {
                disp += sign * sd * rng.standard_normal();
            }
            positions[k * n + i] = wrap(x0 + disp);
        }
        displacements[i] = disp;
    }
    Ok(ParticlePath {
        alpha: n,
        times,
        positions,
        displacements,
    })
}

/// Exact marginal `μ_t` without storing a path: one Gaussian per particle.
pub fn sample_marginal(
    mu0: &EmpiricalMeasure,
    alpha: f64,
    t: f64,
    stream: &RngStream,
    antithetic: bool,
) -> Result<EmpiricalMeasure> {
    Ok(simulate_path_signed(mu0, alpha, t, 1, stream, antithetic)?.final_state())
}

/// `M_t(φ)` and its compensator `∫₀ᵗ ⟨μ_s, Γφ⟩ ds` along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSample {
    pub phi: FourierFunction,
    pub times: Vec<f64>,
    pub m_values: Vec<f64>,
    pub qv_integral: Vec<f64>,
}

/// Evaluates
/// `M_t(φ) = ⟨μ_t,φ⟩ − ⟨μ₀,φ⟩ − (α/2) ∫₀ᵗ ⟨μ_s, Lφ⟩ ds`
/// and `∫₀ᵗ ⟨μ_s, Γφ⟩ ds` on the path grid, integrals by the trapezoid rule.
pub fn martingale_functional(path: &ParticlePath, phi: &FourierFunction) -> MartingaleSample {
    let alpha = path.alpha() as f64;
    let lphi = phi.generator_l();
    let gamma = carre_du_champ(phi, phi);

    let steps = path.num_states();
    let mut m_values = Vec::with_capacity(steps);
    let mut qv_integral = Vec::with_capacity(steps);

    let pos0 = path.positions_at(0);
    let phi0 = pair_positions(pos0, |x| phi.eval(x));
    let mut prev_l = pair_positions(pos0, |x| lphi.eval(x));
    let mut prev_g = pair_positions(pos0, |x| gamma.eval(x));
    let (mut drift, mut qv) = (0.0, 0.0);
    m_values.push(0.0);
    qv_integral.push(0.0);

    for k in 1..steps {
        let pos = path.positions_at(k);
        let h = path.times[k] - path.times[k - 1];
        let l = pair_positions(pos, |x| lphi.eval(x));
        let g = pair_positions(pos, |x| gamma.eval(x));
        drift += 0.5 * h * (prev_l + l);
        qv += 0.5 * h * (prev_g + g);
        let phik = pair_positions(pos, |x| phi.eval(x));
        m_values.push(phik - phi0 - 0.5 * alpha * drift);
        qv_integral.push(qv);
        prev_l = l;
        prev_g = g;
    }

    MartingaleSample {
        phi: phi.clone(),
        times: path.times.clone(),
        m_values,
        qv_integral,
    }
}

/// Replicate statistics for the martingale and quadratic-variation claims
/// at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvReport {
    pub replicates: usize,
    pub time: f64,
    pub mean_m: f64,
    pub stderr_m: f64,
    /// `mean_m / stderr_m`.
    pub z_m: f64,
    pub mean_m_sq: f64,
    pub stderr_m_sq: f64,
    pub mean_qv: f64,
    pub stderr_qv: f64,
    /// Standard error of the paired difference `M_t² − ∫⟨μ_s,Γφ⟩ds`.
    pub stderr_diff: f64,
    /// `(mean_m_sq − mean_qv) / stderr_diff`.
    pub z_qv: f64,
}

impl QvReport {
    pub const MIN_REPLICATES: usize = 100;

    /// Builds the report from per-replicate `(M_t, ∫⟨μ_s,Γφ⟩ds)` pairs.
    pub fn from_pairs(time: f64, pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < Self::MIN_REPLICATES {
            return Err(Error::TooFew {
                what: "replicates",
                required: Self::MIN_REPLICATES,
                got: pairs.len(),
            });
        }
        let m: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let m2: Vec<f64> = pairs.iter().map(|p| p.0 * p.0).collect();
        let qv: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let diff: Vec<f64> = pairs.iter().map(|p| p.0 * p.0 - p.1).collect();
        let (sm, sm2, sqv, sd) = (Summary::of(&m), Summary::of(&m2), Summary::of(&qv), Summary::of(&diff));
        Ok(Self {
            replicates: pairs.len(),
            time,
            mean_m: sm.mean,
            stderr_m: sm.stderr,
            z_m: crate::stats::z_score(sm.mean, 0.0, sm.stderr, 1e-14),
            mean_m_sq: sm2.mean,
            stderr_m_sq: sm2.stderr,
            mean_qv: sqv.mean,
            stderr_qv: sqv.stderr,
            stderr_diff: sd.stderr,
            z_qv: crate::stats::z_score(sm2.mean, sqv.mean, sd.stderr, 1e-14),
        })
    }
}

/// Statistics at grid index `step` over an ensemble of samples.
pub fn qv_statistic(samples: &[MartingaleSample], step: usize) -> Result<QvReport> {
    let time = samples.first().map_or(0.0, |s| s.times[step]);
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.m_values[step], s.qv_integral[step])).collect();
    QvReport::from_pairs(time, &pairs)
}

/// Configuration of a martingale/quadratic-variation ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleExperiment {
    pub mu0: EmpiricalMeasure,
    pub alpha: f64,
    pub phi: FourierFunction,
    pub t_final: f64,
    pub num_steps: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Grid indices at which statistics are reported; the final index is
    /// always included.
    pub checkpoints: Vec<usize>,
}

impl MartingaleExperiment {
    pub const DEFAULT_STEPS: usize = 200;

    /// Runs all replicates (replicate `r` uses streams `r·2³² + i`) and
    /// reports statistics at each checkpoint, in checkpoint order.
    pub fn run(&self) -> Result<Vec<QvReport>> {
        particle_count(self.alpha, &self.mu0)?;
        let mut checkpoints = self.checkpoints.clone();
        checkpoints.retain(|&k| k < self.num_steps);
        checkpoints.push(self.num_steps);
        checkpoints.sort_unstable();
        checkpoints.dedup();

        let per_replicate: Vec<Result<Vec<(f64, f64)>>> = par_map_ordered(self.replicates, |r| {
            let stream = RngStream::replicate(self.seed, r as u32);
            let path = simulate_path(&self.mu0, self.alpha, self.t_final, self.num_steps, &stream)?;
            let sample = martingale_functional(&path, &self.phi);
            Ok(checkpoints
                .iter()
                .map(|&k| (sample.m_values[k], sample.qv_integral[k]))
                .collect())
        });
        let per_replicate: Vec<Vec<(f64, f64)>> = per_replicate.into_iter().collect::<Result<_>>()?;

        let dt = self.t_final / self.num_steps as f64;
        checkpoints
            .iter()
            .enumerate()
            .map(|(c, &k)| {
                let pairs: Vec<(f64, f64)> = per_replicate.iter().map(|v| v[c]).collect();
                QvReport::from_pairs(k as f64 * dt, &pairs)
            })
            .collect()
    }
}
