//! Sequential extraction of `p_n = lim_{s→0+} (g(s) − Σ_{k<n} p_k s^k)/s^n`
//! on a geometric grid `s_j = s0·2^{−j}`.

use crate::dd::{self, DoubleDouble};
use crate::error::{Error, PrecisionReport, Result};

use super::expansion::{DivergenceFlag, ExtractionMethod, PgfExpansion};
use super::generating::GeneratingFunction;

/// Relative change over the last three estimates accepted as converged.
pub const STABILITY_RTOL: f64 = 1e-7;
/// Growth of the remainder over three consecutive levels flagged as divergence.
pub const DIVERGENCE_FACTOR: f64 = 2.0;
/// Remainders below this magnitude and still shrinking are treated as zero.
pub const VANISHING_ABS: f64 = 1e-12;

const WINDOW: usize = 3;
const NEVILLE_POINTS: usize = 10;
const DIVERGENCE_MIN: f64 = 1e-8;
const FLOOR_MARGIN: f64 = 100.0;
const SCALE_FLOOR: f64 = 1e-6;
const MAX_POLISH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitGrid {
    pub s0: f64,
    pub levels: usize,
}

impl Default for LimitGrid {
    fn default() -> Self {
        Self { s0: 0.5, levels: 100 }
    }
}

impl LimitGrid {
    /// Default grid with `s0` capped by the function's own suggestion.
    pub fn for_function(g: &dyn GeneratingFunction) -> Self {
        Self {
            s0: g.suggested_s0().min(0.5),
            ..Self::default()
        }
    }

    pub fn s(&self, level: usize) -> f64 {
        self.s0 * 0.5f64.powi(level as i32)
    }
}

/// Polynomial extrapolation to `x = 0` through the given points.
fn neville_at_zero(xs: &[f64], ys: &[DoubleDouble]) -> DoubleDouble {
    let mut p = ys.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let xi = DoubleDouble::from_f64(xs[i]);
            let xj = DoubleDouble::from_f64(xs[i + m]);
            p[i] = (xi * p[i + 1] - xj * p[i]) / (xi - xj);
        }
    }
    p[0]
}

enum Outcome {
    Value { value: DoubleDouble, error: f64 },
    Diverged(DivergenceFlag),
}

/// Extracts `p_0, …, p_order` from `g`. Stops early at the first order whose
/// rescaled remainder grows, recording a divergence flag. Aborts with a
/// precision report when the rounding noise of the remainder exceeds what a
/// stabilized estimate would need.
pub fn extract_coefficients_limit(g: &dyn GeneratingFunction, order: usize, grid: &LimitGrid) -> Result<PgfExpansion> {
    if !(grid.s0 > 0.0 && grid.s0.is_finite()) {
        return Err(Error::Domain {
            name: "s0",
            requirement: "positive and finite",
            value: grid.s0,
        });
    }
    let acc = g.relative_accuracy();
    let mut p: Vec<DoubleDouble> = Vec::new();
    let mut errors: Vec<f64> = Vec::new();
    let mut divergence = None;

    for n in 0..=order {
        match extract_order(g, n, &p, &errors, grid, acc)? {
            Outcome::Value { value, error } => {
                p.push(value);
                errors.push(error);
            }
            Outcome::Diverged(flag) => {
                divergence = Some(flag);
                break;
            }
        }
    }

    let mut out = PgfExpansion::new(
        p.iter().map(|c| c.to_f64()).collect(),
        ExtractionMethod::LimitExtraction,
        Some(errors),
    );
    out.divergence = divergence;
    Ok(out)
}

fn extract_order(
    g: &dyn GeneratingFunction,
    n: usize,
    p: &[DoubleDouble],
    errors: &[f64],
    grid: &LimitGrid,
    acc: f64,
) -> Result<Outcome> {
    let mut xs = Vec::new();
    let mut raw = Vec::new();
    let mut raw_abs = Vec::new();
    let mut estimates: Vec<DoubleDouble> = Vec::new();
    // Best (estimate, increment, floor) once the estimates have stabilized.
    let mut polished: Option<(DoubleDouble, f64, f64)> = None;
    let mut polish_levels = 0;

    for j in 0..grid.levels {
        let s = grid.s(j);
        let sd = DoubleDouble::from_f64(s);
        let gv = g.eval_dd(s)?;
        let mut partial = DoubleDouble::ZERO;
        let mut partial_abs = 0.0;
        let mut inherited = 0.0;
        let mut sk = DoubleDouble::ONE;
        for (k, &pk) in p.iter().enumerate() {
            let term = pk * sk;
            partial = partial + term;
            partial_abs += term.to_f64().abs();
            inherited += errors[k] * sk.to_f64();
            sk = sk * sd;
        }
        let sn = sk.to_f64();
        let floor = if sn > 0.0 {
            (acc * gv.to_f64().abs() + 8.0 * dd::EPSILON * partial_abs + inherited) / sn
        } else {
            f64::INFINITY
        };
        let r = (gv - partial) / sk;
        xs.push(s);
        raw.push(r);
        raw_abs.push(r.to_f64().abs());

        let lo = xs.len().saturating_sub(NEVILLE_POINTS);
        let e = neville_at_zero(&xs[lo..], &raw[lo..]);
        let increment = estimates.last().map_or(f64::INFINITY, |&prev| (e - prev).to_f64().abs());
        estimates.push(e);
        let needed = STABILITY_RTOL * e.to_f64().abs().max(SCALE_FLOOR);

        if let Some((best, best_inc, best_floor)) = polished {
            if floor > needed || increment + floor >= best_inc + best_floor || polish_levels >= MAX_POLISH {
                return Ok(Outcome::Value {
                    value: best,
                    error: best_inc + best_floor,
                });
            }
            polished = Some((e, increment, floor));
            polish_levels += 1;
            continue;
        }

        if raw_abs.len() >= WINDOW {
            let tail = &raw_abs[raw_abs.len() - WINDOW..];
            if tail.windows(2).all(|w| w[1] < w[0]) && tail[WINDOW - 1] <= VANISHING_ABS {
                return Ok(Outcome::Value {
                    value: DoubleDouble::ZERO,
                    error: floor,
                });
            }
        }

        if j + 1 > WINDOW {
            let tail: Vec<f64> = estimates[estimates.len() - WINDOW..].iter().map(|e| e.to_f64()).collect();
            let scale = e.to_f64().abs().max(SCALE_FLOOR);
            let spread = tail.iter().fold(0.0f64, |m, &v| m.max((v - tail[WINDOW - 1]).abs()));
            if spread <= STABILITY_RTOL * scale {
                polished = Some((e, increment, floor));
                continue;
            }
        }

        if raw_abs.len() > WINDOW {
            let tail = &raw_abs[raw_abs.len() - WINDOW - 1..];
            let last = tail[WINDOW];
            if tail.windows(2).all(|w| w[1] > w[0])
                && last >= DIVERGENCE_FACTOR * tail[0]
                && last >= DIVERGENCE_MIN
                && last > FLOOR_MARGIN * floor
            {
                let evidence = xs[xs.len() - WINDOW - 1..].iter().copied().zip(tail.iter().copied()).collect();
                return Ok(Outcome::Diverged(DivergenceFlag { order: n, evidence }));
            }
        }

        if floor > needed {
            return Err(precision_report(n, j, s, floor, &estimates));
        }
    }
    if let Some((best, best_inc, best_floor)) = polished {
        return Ok(Outcome::Value {
            value: best,
            error: best_inc + best_floor,
        });
    }
    let j = grid.levels.saturating_sub(1);
    Err(precision_report(n, j, grid.s(j), f64::NAN, &estimates))
}

fn precision_report(order: usize, level: usize, s: f64, floor: f64, estimates: &[DoubleDouble]) -> Error {
    let lo = estimates.len().saturating_sub(WINDOW);
    Error::PrecisionExhausted(PrecisionReport {
        order,
        level,
        s,
        noise_floor: floor,
        recent_estimates: estimates[lo..].iter().map(|e| e.to_f64()).collect(),
    })
}
