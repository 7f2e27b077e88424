//! Coefficient tables `p_k` and their extraction by formal power series.

use crate::dd::DoubleDouble;
use crate::error::{require, Error, Result};

use super::generating::WeightedAtoms;
use super::occupation::OccupationFunction;
use super::series::PowerSeries;

/// Largest supported series order.
pub const MAX_SERIES_ORDER: usize = 64;

/// Tolerance below zero tolerated for a series coefficient.
pub const SERIES_NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMethod {
    SeriesComposition,
    LimitExtraction,
    MonteCarlo,
}

impl ExtractionMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::SeriesComposition => "series-composition",
            Self::LimitExtraction => "limit-extraction",
            Self::MonteCarlo => "monte-carlo",
        }
    }
}

/// The rescaled remainder failed to be `O(1)` at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceFlag {
    pub order: usize,
    /// `(s, |remainder|/s^order)` over the levels that triggered the flag.
    pub evidence: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityFlag {
    pub order: usize,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgfExpansion {
    pub coefficients: Vec<f64>,
    pub method: ExtractionMethod,
    pub divergence: Option<DivergenceFlag>,
    pub negativity: Option<NegativityFlag>,
    /// Per-coefficient standard errors (Monte Carlo) or error bounds (limit).
    pub uncertainty: Option<Vec<f64>>,
}

impl PgfExpansion {
    pub(crate) fn new(coefficients: Vec<f64>, method: ExtractionMethod, uncertainty: Option<Vec<f64>>) -> Self {
        let mut out = Self {
            coefficients,
            method,
            divergence: None,
            negativity: None,
            uncertainty,
        };
        out.negativity = out.find_negative();
        out
    }

    fn find_negative(&self) -> Option<NegativityFlag> {
        self.coefficients.iter().enumerate().find_map(|(k, &p)| {
            let tol = match (&self.uncertainty, self.method) {
                (Some(u), ExtractionMethod::MonteCarlo) => 3.0 * u[k],
                (Some(u), _) => SERIES_NEGATIVITY_TOL.max(u[k]),
                (None, _) => SERIES_NEGATIVITY_TOL,
            };
            (p < -tol).then_some(NegativityFlag {
                order: k,
                value: p,
                tolerance: tol,
            })
        })
    }

    pub fn is_flagged(&self) -> bool {
        self.divergence.is_some() || self.negativity.is_some()
    }

    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// Degree-`order` Taylor coefficients of
/// `exp(α Σ_i w_i [ln(1 − h_i) + ln(1 + s h_i/(1 − h_i))])`.
pub fn series_from_h(alpha: f64, weights: &[f64], h: &[f64], order: usize) -> Result<PgfExpansion> {
    if order > MAX_SERIES_ORDER {
        return Err(Error::SeriesOrder(order));
    }
    require(alpha > 0.0 && alpha.is_finite(), "alpha", "positive and finite", alpha)?;
    if weights.len() != h.len() || h.is_empty() {
        return Err(Error::InvalidMeasure("weights and h must match and be nonempty".into()));
    }
    let len = order + 1;
    let one = DoubleDouble::ONE;
    let mut log = PowerSeries::zero(len);
    for (&w, &hi) in weights.iter().zip(h) {
        require(hi > 0.0 && hi < 1.0, "h", "in (0, 1)", hi)?;
        let q = one - DoubleDouble::from_f64(hi);
        let ratio = DoubleDouble::from_f64(hi) / q;
        let mut coeffs = vec![q.ln()];
        let mut power = one;
        for k in 1..len {
            power = power * ratio;
            let term = power / DoubleDouble::from_f64(k as f64);
            coeffs.push(if k % 2 == 1 { term } else { -term });
        }
        log = log.add(&PowerSeries::new(coeffs, len).scale(DoubleDouble::from_f64(w)));
    }
    let p = log.scale(DoubleDouble::from_f64(alpha)).exp();
    Ok(PgfExpansion::new(p.to_f64(), ExtractionMethod::SeriesComposition, None))
}

/// Series extraction for an atomic initial measure.
pub fn extract_coefficients_series(
    alpha: f64,
    mu0: &WeightedAtoms,
    occ: &OccupationFunction,
    order: usize,
) -> Result<PgfExpansion> {
    let h: Vec<f64> = mu0.positions().iter().map(|&x| occ.h_at(x)).collect();
    series_from_h(alpha, mu0.weights(), &h, order)
}

/// Law of a sum of independent Bernoulli variables, by direct convolution.
pub fn poisson_binomial(h: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &q in h {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &pk) in p.iter().enumerate() {
            next[k] += pk * (1.0 - q);
            next[k + 1] += pk * q;
        }
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_half() {
        let e = series_from_h(1.0, &[1.0], &[0.5], 6).unwrap();
        assert!((e.coefficients[0] - 0.5).abs() < 1e-15);
        assert!((e.coefficients[1] - 0.5).abs() < 1e-15);
        assert!(e.coefficients[2..].iter().all(|c| c.abs() < 1e-15));
        assert!(e.negativity.is_none());
    }

    #[test]
    fn matches_convolution_for_integer_alpha() {
        let h = [0.2, 0.65, 0.4];
        let e = series_from_h(3.0, &[1.0 / 3.0; 3], &h, 8).unwrap();
        let oracle = poisson_binomial(&h);
        for k in 0..=8 {
            let expected = oracle.get(k).copied().unwrap_or(0.0);
            assert!((e.coefficients[k] - expected).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn non_integer_alpha_goes_negative() {
        let e = series_from_h(1.5, &[1.0], &[0.3], 8).unwrap();
        let flag = e.negativity.unwrap();
        assert_eq!(flag.order, 3);
    }

    #[test]
    fn order_budget() {
        assert!(matches!(series_from_h(1.0, &[1.0], &[0.5], 65), Err(Error::SeriesOrder(65))));
        assert!(series_from_h(1.0, &[1.0], &[0.5], 64).is_ok());
    }

    #[test]
    fn convolution_sums_to_one() {
        let p = poisson_binomial(&[0.1, 0.9, 0.5, 0.33]);
        assert_eq!(p.len(), 5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
