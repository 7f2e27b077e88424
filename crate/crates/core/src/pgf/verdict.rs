//! Consistency verdicts for extracted coefficient tables and the `A ↑ E`
//! mass probe.

use std::fmt;

use crate::error::{require, Result};
use crate::torus::TorusDomain;

use super::expansion::{extract_coefficients_series, PgfExpansion};
use super::generating::{build_g, GeneratingFunction, InitialMeasure, WeightedAtoms};
use super::occupation::{IntervalSet, OccupationFunction};

/// Tolerance on `Σ_{k≤⌊α⌋} p_k = 1`.
pub const MASS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    ConsistentInteger,
    ViolatesNonnegativity { order: usize, value: f64 },
    ViolatesTaylor { order: usize, checked_up_to: usize },
    ViolatesTotalMass { floor_alpha: usize, mass: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ConsistentInteger => "consistent-integer",
            Self::ViolatesNonnegativity { .. } => "violates-nonnegativity",
            Self::ViolatesTaylor { .. } => "violates-taylor",
            Self::ViolatesTotalMass { .. } => "violates-total-mass",
        }
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self, Self::ConsistentInteger)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ConsistentInteger => write!(f, "consistent-integer"),
            Self::ViolatesNonnegativity { order, value } => {
                write!(f, "violates-nonnegativity (p_{order} = {value:e})")
            }
            Self::ViolatesTaylor { order, checked_up_to } => {
                write!(f, "violates-taylor up to order {checked_up_to} (remainder diverges at order {order})")
            }
            Self::ViolatesTotalMass { floor_alpha, mass } => {
                write!(f, "violates-total-mass (sum of p_k for k <= {floor_alpha} is {mass})")
            }
        }
    }
}

/// Applies the checks in order: nonnegativity, Taylor expansion, total mass
/// on `{0, …, ⌊α⌋}`.
pub fn verdict_from_expansion(alpha: f64, expansion: &PgfExpansion, checked_up_to: usize) -> Verdict {
    if let Some(flag) = expansion.negativity {
        return Verdict::ViolatesNonnegativity {
            order: flag.order,
            value: flag.value,
        };
    }
    if let Some(flag) = &expansion.divergence {
        return Verdict::ViolatesTaylor {
            order: flag.order,
            checked_up_to,
        };
    }
    let floor_alpha = alpha.floor() as usize;
    let mass: f64 = expansion.coefficients.iter().take(floor_alpha + 1).sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Verdict::ViolatesTotalMass { floor_alpha, mass };
    }
    Verdict::ConsistentInteger
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub expansion: PgfExpansion,
    pub order: usize,
}

/// Series extraction to order `order` followed by [`verdict_from_expansion`].
pub fn atomicity_verdict(
    alpha: f64,
    mu0: &WeightedAtoms,
    occ: &OccupationFunction,
    order: usize,
) -> Result<VerdictReport> {
    let expansion = extract_coefficients_series(alpha, mu0, occ, order)?;
    Ok(VerdictReport {
        verdict: verdict_from_expansion(alpha, &expansion, order),
        expansion,
        order,
    })
}

/// Window of `s` over which the small-`s` power of `g` is fitted.
pub const PROBE_WINDOW: (f64, f64) = (1e-2, 1e-1);
const PROBE_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProbeRow {
    pub coverage: f64,
    pub slope: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassProbe {
    pub alpha: f64,
    pub rows: Vec<MassProbeRow>,
}

impl MassProbe {
    pub fn final_slope(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.slope)
    }
}

/// Least-squares slope of `ln g` against `ln s` on [`PROBE_WINDOW`].
pub fn log_log_slope(g: &dyn GeneratingFunction) -> Result<f64> {
    let (lo, hi) = PROBE_WINDOW;
    let mut pts = Vec::with_capacity(PROBE_POINTS);
    for i in 0..PROBE_POINTS {
        let u = i as f64 / (PROBE_POINTS - 1) as f64;
        let s = lo * (hi / lo).powf(u);
        pts.push((s.ln(), g.eval(s)?.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Fits the small-`s` power of `g` for arcs of growing coverage centred at
/// `center`. As the arc fills the torus `g(s) → s^α`.
pub fn mass_probe(
    alpha: f64,
    mu0: &InitialMeasure,
    center: f64,
    coverages: &[f64],
    t: f64,
    dom: TorusDomain,
) -> Result<MassProbe> {
    let mut rows = Vec::with_capacity(coverages.len());
    for &coverage in coverages {
        require(coverage > 0.0 && coverage < 1.0, "coverage", "in (0, 1)", coverage)?;
        let occ = OccupationFunction::new(IntervalSet::centered(center, coverage)?, t, alpha, dom)?;
        let g = build_g(alpha, mu0, &occ)?;
        rows.push(MassProbeRow {
            coverage,
            slope: log_log_slope(&g)?,
            delta: occ.delta,
        });
    }
    Ok(MassProbe { alpha, rows })
}
