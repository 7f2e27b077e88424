//! Empirical law of `X = αμ_t(A)` sampled from the particle solution.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::particles::{particle_count, sample_marginal, EmpiricalMeasure};
use crate::rng::RngStream;
use crate::stats::par_map_ordered;

use super::expansion::{extract_coefficients_series, ExtractionMethod, PgfExpansion};
use super::generating::WeightedAtoms;
use super::occupation::OccupationFunction;

/// Bins with expected count below this are merged into a neighbour.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloPgf {
    pub expansion: PgfExpansion,
    pub counts: Vec<u64>,
    pub replicates: usize,
    pub seed: u64,
    /// Every sampled `αμ_t(A)` was an integer in `{0, …, α}`.
    pub all_integer: bool,
    /// Series coefficients used as the expected law.
    pub expected: Vec<f64>,
    pub chi_square: ChiSquareTest,
}

/// Samples `αμ_t(A)` over `replicates` particle solutions at the time and
/// set of `occ`, and compares the histogram with the series coefficients.
pub fn monte_carlo_pgf(
    alpha: f64,
    mu0: &EmpiricalMeasure,
    occ: &OccupationFunction,
    replicates: usize,
    seed: u64,
) -> Result<MonteCarloPgf> {
    let n = particle_count(alpha, mu0)?;
    if occ.diffusivity != n as f64 {
        return Err(Error::Domain {
            name: "occupation diffusivity",
            requirement: "equal to alpha",
            value: occ.diffusivity,
        });
    }
    if replicates < 2 {
        return Err(Error::TooFew {
            what: "replicates",
            required: 2,
            got: replicates,
        });
    }

    let samples: Vec<f64> = par_map_ordered(replicates, |r| {
        let stream = RngStream::replicate(seed, r as u32);
        let mu = sample_marginal(mu0, alpha, occ.t, &stream, false).expect("validated");
        let inside = mu.positions().iter().filter(|&&x| occ.set.contains(x)).count();
        alpha * inside as f64 / n as f64
    });

    let all_integer = samples
        .iter()
        .all(|&x| x.fract() == 0.0 && (0.0..=alpha).contains(&x));
    let mut counts = vec![0u64; n + 1];
    for &x in &samples {
        let k = x.round().clamp(0.0, n as f64) as usize;
        counts[k] += 1;
    }

    let total = replicates as f64;
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let stderr: Vec<f64> = freq.iter().map(|&p| (p * (1.0 - p) / total).sqrt()).collect();
    let expansion = PgfExpansion::new(freq, ExtractionMethod::MonteCarlo, Some(stderr));

    let expected = extract_coefficients_series(alpha, &WeightedAtoms::from(mu0), occ, n)?.coefficients;
    let chi_square = chi_square_test(&counts, &expected)?;
    Ok(MonteCarloPgf {
        expansion,
        counts,
        replicates,
        seed,
        all_integer,
        expected,
        chi_square,
    })
}

/// Pearson goodness of fit, merging low-expectation bins from both tails
/// toward the mode.
pub fn chi_square_test(counts: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    let total: u64 = counts.iter().sum();
    let mut bins: Vec<(f64, f64)> = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64, p.max(0.0) * total as f64))
        .collect();
    while bins.len() > 1 && bins[0].1 < MIN_EXPECTED {
        let (o, e) = bins.remove(0);
        bins[0].0 += o;
        bins[0].1 += e;
    }
    while bins.len() > 1 && bins[bins.len() - 1].1 < MIN_EXPECTED {
        let (o, e) = bins.pop().expect("nonempty");
        let last = bins.len() - 1;
        bins[last].0 += o;
        bins[last].1 += e;
    }
    if bins.len() < 2 {
        return Err(Error::TooFew {
            what: "histogram bins with expected count at least 5",
            required: 2,
            got: bins.len(),
        });
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}
