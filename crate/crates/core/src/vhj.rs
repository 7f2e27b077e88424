//! Cole-Hopf solution of the viscous Hamilton-Jacobi equation
//!
//! ```text
//! ∂_t v = (α/2) Δv − ½ |v′|²,   v(0) = f,
//! ```
//!
//! given by `V_t f = −α ln P_t e^{−f/α}` with `P_t` the heat semigroup of
//! `(α/2)Δ`, together with checks of its residual, its extremum principles
//! and its gradient estimate.

use crate::error::{require, Error, Result};
use crate::fourier::{extrema, FourierFunction};
use crate::spectral::spectral_derivatives;
use crate::torus::TorusDomain;

/// Oversampling factor used to bound extrema of trigonometric polynomials.
pub const EXTREMA_OVERSAMPLE: usize = 4;

/// Grid-sampled `V_t f` together with the heat-propagated exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct VhjField {
    pub alpha: f64,
    pub t: f64,
    pub f: FourierFunction,
    pub domain: TorusDomain,
    /// `V_t f` on the grid nodes.
    pub values: Vec<f64>,
    /// `P_t e^{−f/α}` on the grid nodes.
    pub exp_transform: Vec<f64>,
    /// Fourier modes of `P_t e^{−f/α}` (up to `grid_size/2 − 1`).
    pub propagated: FourierFunction,
    /// Measured sup-error of the projected `e^{−f/α}` at cell midpoints.
    pub projection_error: f64,
}

/// Samples `e^{−f/α}` on the grid, projects it to `grid_size/2 − 1` modes,
/// applies the heat semigroup of `(α/2)Δ` for time `t` and maps back with
/// `−α ln`.
pub fn cole_hopf(dom: &TorusDomain, f: &FourierFunction, alpha: f64, t: f64) -> Result<VhjField> {
    require(alpha > 0.0 && alpha.is_finite(), "alpha", "positive and finite", alpha)?;
    require(t >= 0.0 && t.is_finite(), "t", "finite and nonnegative", t)?;
    if !f.is_finite() {
        return Err(Error::Domain {
            name: "f",
            requirement: "finite coefficients",
            value: f64::NAN,
        });
    }
    let n = dom.grid_size();
    let max_mode = n / 2 - 1;
    let boltzmann = |v: f64| (-v / alpha).exp();

    let u0_samples: Vec<f64> = f.sample(dom).into_iter().map(boltzmann).collect();
    let u0 = FourierFunction::from_samples(&u0_samples, max_mode);

    let h = dom.spacing();
    let projection_error = (0..n)
        .map(|j| {
            let x = (j as f64 + 0.5) * h;
            (u0.eval(x) - boltzmann(f.eval(x))).abs()
        })
        .fold(0.0, f64::max);

    let propagated = u0.heat_semigroup(alpha, t)?;
    let exp_transform = propagated.sample(dom);
    if let Some(&bad) = exp_transform.iter().find(|&&u| u <= 0.0 || !u.is_finite()) {
        return Err(Error::Domain {
            name: "P_t exp(-f/alpha)",
            requirement: "positive (grid too coarse for f/alpha)",
            value: bad,
        });
    }
    let values = exp_transform.iter().map(|u| -alpha * u.ln()).collect();

    Ok(VhjField {
        alpha,
        t,
        f: f.clone(),
        domain: *dom,
        values,
        exp_transform,
        propagated,
        projection_error,
    })
}

impl VhjField {
    /// `V_t f(x)` at an arbitrary point, from the spectral representation.
    pub fn value_at(&self, x: f64) -> f64 {
        -self.alpha * self.propagated.eval(x).ln()
    }

    /// `Γ V_t f = |∂_x V_t f|²` on the grid, differentiating the sampled
    /// values spectrally.
    pub fn carre_du_champ(&self) -> Vec<f64> {
        let (d1, _) = spectral_derivatives(&self.values);
        d1.into_iter().map(|d| d * d).collect()
    }

    /// Projection of the sampled `V_t f` onto `grid_size/2 − 1` modes, for
    /// use as initial datum of a further solve.
    pub fn to_fourier(&self) -> FourierFunction {
        FourierFunction::from_samples(&self.values, self.domain.grid_size() / 2 - 1)
    }
}

/// Sup-norm of `∂_t v − (α/2) v″ + ½ |v′|²` over the interior levels of an
/// equally spaced family of solutions, with the time derivative by centered
/// differences and the spatial terms spectral.
pub fn vhj_residual(family: &[VhjField]) -> Result<f64> {
    if family.len() < 3 {
        return Err(Error::TooFew {
            what: "time levels",
            required: 3,
            got: family.len(),
        });
    }
    let dt = family[1].t - family[0].t;
    require(dt > 0.0, "time spacing", "positive", dt)?;
    for w in family.windows(2) {
        let step = w[1].t - w[0].t;
        if (step - dt).abs() > 1e-9 * dt || w[1].alpha != w[0].alpha || w[1].domain != w[0].domain {
            return Err(Error::Domain {
                name: "field family",
                requirement: "equally spaced in time with a common alpha and grid",
                value: step,
            });
        }
    }
    let alpha = family[0].alpha;
    let mut worst: f64 = 0.0;
    for k in 1..family.len() - 1 {
        let (d1, d2) = spectral_derivatives(&family[k].values);
        for j in 0..d1.len() {
            let dt_v = (family[k + 1].values[j] - family[k - 1].values[j]) / (2.0 * dt);
            let r = dt_v - 0.5 * alpha * d2[j] + 0.5 * d1[j] * d1[j];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualLevel {
    pub dt: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub grid_size: usize,
    pub levels: Vec<ResidualLevel>,
    /// `log2(residual(dt) / residual(dt/2))` between consecutive levels.
    pub observed_orders: Vec<f64>,
}

impl ResidualReport {
    pub fn min_order(&self) -> f64 {
        self.observed_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Residual at time `t` for `dt0, dt0/2, …` (`levels` values), each from the
/// three-level family `t − dt, t, t + dt`.
pub fn residual_refinement(
    dom: &TorusDomain,
    f: &FourierFunction,
    alpha: f64,
    t: f64,
    dt0: f64,
    levels: usize,
) -> Result<ResidualReport> {
    require(dt0 > 0.0 && dt0 < t, "dt", "positive and below t", dt0)?;
    let mut out = Vec::with_capacity(levels);
    let mut dt = dt0;
    for _ in 0..levels {
        let family = [t - dt, t, t + dt]
            .iter()
            .map(|&s| cole_hopf(dom, f, alpha, s))
            .collect::<Result<Vec<_>>>()?;
        out.push(ResidualLevel {
            dt,
            residual: vhj_residual(&family)?,
        });
        dt *= 0.5;
    }
    let observed_orders = out.windows(2).map(|w| (w[0].residual / w[1].residual).log2()).collect();
    Ok(ResidualReport {
        grid_size: dom.grid_size(),
        levels: out,
        observed_orders,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremumReport {
    pub inf_f: f64,
    pub sup_f: f64,
    pub inf_v: f64,
    pub sup_v: f64,
    /// `inf f ≤ inf V_t f` within the slack.
    pub minimum_principle: bool,
    /// `sup V_t f ≤ sup f` within the slack.
    pub maximum_principle: bool,
    /// Both inequalities hold strictly.
    pub strict: bool,
}

impl ExtremumReport {
    pub const SLACK: f64 = 1e-12;

    pub fn holds(&self) -> bool {
        self.minimum_principle && self.maximum_principle
    }
}

/// Checks `inf f ≤ inf V_t f` and `sup V_t f ≤ sup f` on the grid. The
/// extrema of `f` are taken over a refined grid containing the nodes.
pub fn check_extremum_principles(field: &VhjField) -> ExtremumReport {
    let (inf_f, sup_f) = field.f.grid_extrema(&field.domain, EXTREMA_OVERSAMPLE);
    let (inf_v, sup_v) = extrema(&field.values);
    let slack = ExtremumReport::SLACK * (1.0 + inf_f.abs().max(sup_f.abs()));
    ExtremumReport {
        inf_f,
        sup_f,
        inf_v,
        sup_v,
        minimum_principle: inf_f <= inf_v + slack,
        maximum_principle: sup_v <= sup_f + slack,
        strict: inf_f < inf_v && sup_v < sup_f,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientReport {
    /// `max_x Γ V_t f(x)` on the grid.
    pub max_gamma_v: f64,
    /// `sup f − inf f`.
    pub diameter: f64,
    /// `‖Γ f‖_∞`.
    pub sup_gamma_f: f64,
    /// `e^{(2/α) diam f} ‖Γf‖_∞`.
    pub bound: f64,
    pub holds: bool,
    /// Largest excess of `Γ V_t f` over `α² (P_t e^{−f/α})^{−2} P_t Γ e^{−f/α}`.
    pub intermediate_excess: f64,
    pub intermediate_holds: bool,
}

impl GradientReport {
    pub const SLACK: f64 = 1e-8;
}

/// Checks the flat-space gradient estimate
/// `Γ V_t f ≤ α² (P_t e^{−f/α})^{−2} P_t Γ e^{−f/α} ≤ e^{(2/α) diam f} ‖Γf‖_∞`
/// pointwise on the grid.
pub fn check_gradient_estimate(field: &VhjField) -> GradientReport {
    let dom = &field.domain;
    let alpha = field.alpha;
    let fine = dom.refined(EXTREMA_OVERSAMPLE);
    let (lo, hi) = extrema(&field.f.sample(&fine));
    let diameter = hi - lo;
    let df = field.f.derivative();
    let sup_gamma_f = df.sample(&fine).into_iter().map(|d| d * d).fold(0.0, f64::max);
    let bound = (2.0 / alpha * diameter).exp() * sup_gamma_f;

    let gamma_v = field.carre_du_champ();
    let max_gamma_v = gamma_v.iter().copied().fold(0.0, f64::max);

    // Γ e^{−f/α} = (f′/α)² e^{−2f/α}, sampled exactly then propagated.
    let fx = field.f.sample(dom);
    let dfx = df.sample(dom);
    let gamma_u: Vec<f64> = fx
        .iter()
        .zip(&dfx)
        .map(|(v, d)| (d / alpha).powi(2) * (-2.0 * v / alpha).exp())
        .collect();
    let intermediate = FourierFunction::from_samples(&gamma_u, dom.grid_size() / 2 - 1)
        .heat_semigroup(alpha, field.t)
        .map(|p| p.sample(dom))
        .unwrap_or(gamma_u);
    let intermediate_excess = gamma_v
        .iter()
        .zip(&intermediate)
        .zip(&field.exp_transform)
        .map(|((g, p), u)| {
            let rhs = alpha * alpha * p / (u * u);
            (g - rhs) / (1.0 + rhs.abs())
        })
        .fold(f64::NEG_INFINITY, f64::max);

    GradientReport {
        max_gamma_v,
        diameter,
        sup_gamma_f,
        bound,
        holds: max_gamma_v <= bound + GradientReport::SLACK * (1.0 + bound),
        intermediate_excess,
        intermediate_holds: intermediate_excess <= GradientReport::SLACK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> TorusDomain {
        TorusDomain::new(256).unwrap()
    }

    #[test]
    fn constants_are_fixed() {
        let f = FourierFunction::constant(1.7);
        for (alpha, t) in [(0.5, 0.1), (1.0, 0.0), (3.0, 2.0)] {
            let v = cole_hopf(&dom(), &f, alpha, t).unwrap();
            assert!(v.values.iter().all(|x| (x - 1.7).abs() < 1e-12), "alpha {alpha} t {t}");
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let f = FourierFunction::new(0.4, vec![0.8, -0.3], vec![0.2, 0.0, 0.1]);
        let v = cole_hopf(&dom(), &f, 0.7, 0.0).unwrap();
        for (x, got) in dom().points().iter().zip(&v.values) {
            assert!((got - f.eval(*x)).abs() < 1e-8);
        }
        assert!(v.projection_error < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = FourierFunction::constant(0.0);
        assert!(cole_hopf(&dom(), &f, 0.0, 0.1).is_err());
        assert!(cole_hopf(&dom(), &f, -1.0, 0.1).is_err());
        assert!(cole_hopf(&dom(), &f, 1.0, -0.1).is_err());
    }

    #[test]
    fn residual_of_constant_is_roundoff() {
        let f = FourierFunction::constant(0.3);
        let fam: Vec<_> = [0.01, 0.02, 0.03]
            .iter()
            .map(|&t| cole_hopf(&dom(), &f, 1.0, t).unwrap())
            .collect();
        assert!(vhj_residual(&fam).unwrap() < 1e-10);
    }

    #[test]
    fn residual_needs_three_levels() {
        let f = FourierFunction::constant(0.3);
        let fam: Vec<_> = [0.01, 0.02]
            .iter()
            .map(|&t| cole_hopf(&dom(), &f, 1.0, t).unwrap())
            .collect();
        assert!(matches!(vhj_residual(&fam), Err(Error::TooFew { .. })));
    }

    #[test]
    fn extremum_principles_for_cosine() {
        let f = FourierFunction::cosine(1, 1.0);
        let v = cole_hopf(&dom(), &f, 1.0, 0.05).unwrap();
        let r = check_extremum_principles(&v);
        assert!(r.holds() && r.strict, "{r:?}");

        let c = cole_hopf(&dom(), &FourierFunction::constant(2.0), 1.0, 0.05).unwrap();
        let rc = check_extremum_principles(&c);
        assert!(rc.holds());
        assert!((rc.inf_v - 2.0).abs() < 1e-12 && (rc.sup_v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_estimate_for_cosine() {
        let f = FourierFunction::cosine(1, 1.0);
        let v = cole_hopf(&dom(), &f, 1.0, 0.05).unwrap();
        let r = check_gradient_estimate(&v);
        assert!(r.holds && r.intermediate_holds, "{r:?}");
        assert!(r.max_gamma_v < r.bound);

        let c = cole_hopf(&dom(), &FourierFunction::constant(1.0), 1.0, 0.05).unwrap();
        let rc = check_gradient_estimate(&c);
        assert!(rc.holds && rc.bound == 0.0);
    }
}
