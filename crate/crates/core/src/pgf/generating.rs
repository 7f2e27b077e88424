//! Generating functions `g(s) = exp(α⟨μ₀, ln(1 + (s−1)h)⟩)` and simple
//! closed-form inputs for the extraction routines.

use crate::dd::{self, DoubleDouble};
use crate::error::{require, Error, Result};
use crate::fourier::FourierFunction;
use crate::particles::EmpiricalMeasure;
use crate::torus::{wrap, TorusDomain};

use super::occupation::OccupationFunction;

/// A function that can be evaluated in double-double precision near `s = 0`.
pub trait GeneratingFunction {
    fn eval_dd(&self, s: f64) -> Result<DoubleDouble>;

    fn eval(&self, s: f64) -> Result<f64> {
        self.eval_dd(s).map(DoubleDouble::to_f64)
    }

    /// Relative accuracy of [`GeneratingFunction::eval_dd`].
    fn relative_accuracy(&self) -> f64 {
        64.0 * dd::EPSILON
    }

    /// Largest `s0` for which the Taylor expansion at 0 is expected to be
    /// well conditioned on `[0, s0]`.
    fn suggested_s0(&self) -> f64 {
        0.5
    }
}

/// `Σ c_k s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl GeneratingFunction for Polynomial {
    fn eval_dd(&self, s: f64) -> Result<DoubleDouble> {
        let s = DoubleDouble::from_f64(s);
        Ok(self
            .coeffs
            .iter()
            .rev()
            .fold(DoubleDouble::ZERO, |acc, &c| acc * s + DoubleDouble::from_f64(c)))
    }
}

/// `s^p` for `s ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
}

impl GeneratingFunction for PowerLaw {
    fn eval_dd(&self, s: f64) -> Result<DoubleDouble> {
        require(s >= 0.0, "s", "nonnegative", s)?;
        if s == 0.0 {
            return Ok(if self.exponent == 0.0 { DoubleDouble::ONE } else { DoubleDouble::ZERO });
        }
        Ok(DoubleDouble::from_f64(s).powf(self.exponent))
    }
}

/// Adapter for an `f64` closure; its accuracy is that of `f64` arithmetic.
pub struct FnGenerating<F> {
    f: F,
}

impl<F: Fn(f64) -> f64> FnGenerating<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn(f64) -> f64> GeneratingFunction for FnGenerating<F> {
    fn eval_dd(&self, s: f64) -> Result<DoubleDouble> {
        Ok(DoubleDouble::from_f64((self.f)(s)))
    }

    fn relative_accuracy(&self) -> f64 {
        4.0 * f64::EPSILON
    }
}

/// Atoms with arbitrary positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAtoms {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedAtoms {
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || positions.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "need matching nonempty positions and weights, got {} and {}",
                positions.len(),
                weights.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("atom positions must be finite".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidMeasure("atom weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Self {
            positions: positions.into_iter().map(wrap).collect(),
            weights,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(positions: Vec<f64>) -> Result<Self> {
        let w = 1.0 / positions.len().max(1) as f64;
        let weights = vec![w; positions.len()];
        Self::new(positions, weights)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl From<&EmpiricalMeasure> for WeightedAtoms {
    fn from(mu: &EmpiricalMeasure) -> Self {
        Self::uniform(mu.positions().to_vec()).expect("empirical measures are valid")
    }
}

/// Initial measure for the generating function.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialMeasure {
    Atoms(WeightedAtoms),
    /// Probability density on the torus, integrated by the midpoint rule on
    /// the occupation grid.
    Density(FourierFunction),
}

/// `g(s) = exp(α Σ_i w_i ln(1 + (s−1)h_i))` for quadrature weights `w_i`
/// and occupation values `h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationPgf {
    pub alpha: f64,
    pub weights: Vec<f64>,
    pub h: Vec<f64>,
    /// `1 − max h_i`.
    pub delta: f64,
}

impl OccupationPgf {
    pub fn from_h(alpha: f64, weights: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        require(alpha > 0.0 && alpha.is_finite(), "alpha", "positive and finite", alpha)?;
        if weights.len() != h.len() || h.is_empty() {
            return Err(Error::InvalidMeasure("weights and h must match and be nonempty".into()));
        }
        for &hi in &h {
            require(hi > 0.0 && hi < 1.0, "h", "in (0, 1)", hi)?;
        }
        let max_h = h.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            alpha,
            weights,
            h,
            delta: 1.0 - max_h,
        })
    }

    /// Radius of convergence of the expansion at 0, `min (1 − h_i)/h_i`.
    pub fn radius(&self) -> f64 {
        self.h.iter().map(|&h| (1.0 - h) / h).fold(f64::INFINITY, f64::min)
    }
}

impl GeneratingFunction for OccupationPgf {
    fn eval_dd(&self, s: f64) -> Result<DoubleDouble> {
        if !(s > -self.delta) || !s.is_finite() {
            return Err(Error::Domain {
                name: "s",
                requirement: "greater than -delta",
                value: s,
            });
        }
        let sm1 = DoubleDouble::from_f64(s) - DoubleDouble::ONE;
        let mut acc = DoubleDouble::ZERO;
        for (&w, &h) in self.weights.iter().zip(&self.h) {
            let arg = DoubleDouble::ONE + sm1 * DoubleDouble::from_f64(h);
            acc = acc + DoubleDouble::from_f64(w) * arg.ln();
        }
        Ok((acc * DoubleDouble::from_f64(self.alpha)).exp())
    }

    fn relative_accuracy(&self) -> f64 {
        64.0 * dd::EPSILON * (1.0 + self.alpha) * self.h.len() as f64
    }

    fn suggested_s0(&self) -> f64 {
        (0.25 * self.radius()).min(0.5)
    }
}

/// Builds `g` for `X = αμ_t(A)` from the initial measure and occupation
/// probabilities `h = P_t 1_A`.
pub fn build_g(alpha: f64, mu0: &InitialMeasure, occ: &OccupationFunction) -> Result<OccupationPgf> {
    let (weights, h) = match mu0 {
        InitialMeasure::Atoms(atoms) => (
            atoms.weights().to_vec(),
            atoms.positions().iter().map(|&x| occ.h_at(x)).collect(),
        ),
        InitialMeasure::Density(rho) => density_quadrature(rho, &occ.domain, |x| occ.h_at(x))?,
    };
    let mut g = OccupationPgf::from_h(alpha, weights, h)?;
    g.delta = g.delta.min(occ.delta);
    Ok(g)
}

fn density_quadrature(
    rho: &FourierFunction,
    dom: &TorusDomain,
    h: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    require(
        (rho.mean() - 1.0).abs() <= 1e-12,
        "density mean",
        "equal to 1",
        rho.mean(),
    )?;
    let dx = dom.spacing();
    let mids: Vec<f64> = dom.points().iter().map(|&x| x + 0.5 * dx).collect();
    let weights: Vec<f64> = mids.iter().map(|&x| rho.eval(x) * dx).collect();
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
        return Err(Error::InvalidMeasure(format!("density takes a negative value ({})", w / dx)));
    }
    Ok((weights, mids.iter().map(|&x| h(x)).collect()))
}
