//! Explicit finite-volume integrator for `∂_t μ = (α/2)Δμ + ∇·(√μ Ẇ)`.
//!
//! The scheme is deliberately naive: the density is never clipped, so the
//! first negative cell marks where the discretization stops describing a
//! density. It makes no claim to converge to a solution.

use crate::error::{require, Error, Result};
use crate::fourier::FourierFunction;
use crate::rng::RngStream;
use crate::stats::{median, par_map_ordered};
use crate::torus::TorusDomain;

/// Density per unit length on the cells of a [`TorusDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub cell_values: Vec<f64>,
    pub dt: f64,
    pub step_count: usize,
}

impl DensityField {
    pub fn uniform(dom: &TorusDomain, dt: f64) -> Self {
        Self {
            cell_values: vec![1.0; dom.grid_size()],
            dt,
            step_count: 0,
        }
    }

    /// Cell midpoint samples of `rho`.
    pub fn from_function(dom: &TorusDomain, rho: &FourierFunction, dt: f64) -> Self {
        let dx = dom.spacing();
        Self {
            cell_values: dom.points().iter().map(|&x| rho.eval(x + 0.5 * dx)).collect(),
            dt,
            step_count: 0,
        }
    }

    pub fn mass(&self) -> f64 {
        let dx = 1.0 / self.cell_values.len() as f64;
        self.cell_values.iter().sum::<f64>() * dx
    }

    /// First `(cell, value)` with a negative value.
    pub fn first_negative_cell(&self) -> Option<(usize, f64)> {
        self.cell_values.iter().copied().enumerate().find(|&(_, v)| v < 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub alpha: f64,
    pub dt: f64,
    pub grid_size: usize,
    /// Multiplies the noise flux; 0 gives the heat equation.
    pub noise_scale: f64,
}

impl Integrator {
    pub fn new(alpha: f64, dom: &TorusDomain, dt: f64, noise_scale: f64) -> Result<Self> {
        require(alpha > 0.0 && alpha.is_finite(), "alpha", "positive and finite", alpha)?;
        require(dt > 0.0 && dt.is_finite(), "dt", "positive and finite", dt)?;
        require(noise_scale >= 0.0 && noise_scale.is_finite(), "noise_scale", "nonnegative", noise_scale)?;
        let bound = Self::stability_bound(alpha, dom);
        if dt > bound {
            return Err(Error::Unstable { dt, bound });
        }
        Ok(Self {
            alpha,
            dt,
            grid_size: dom.grid_size(),
            noise_scale,
        })
    }

    /// `Δx² / (2·(α/2))`.
    pub fn stability_bound(alpha: f64, dom: &TorusDomain) -> f64 {
        dom.spacing().powi(2) / alpha
    }

    /// One explicit Euler step in flux form. Interface `j+½` sits between
    /// cells `j` and `j+1` (periodically).
    pub fn step(&self, field: &DensityField, stream: &mut RngStream) -> DensityField {
        let n = self.grid_size;
        assert_eq!(field.cell_values.len(), n, "field does not match the integrator grid");
        let mu = &field.cell_values;
        let dx = 1.0 / n as f64;
        let diff = 0.5 * self.alpha * self.dt / (dx * dx);
        let noise = self.noise_scale * (self.dt / dx).sqrt() / dx;

        let mut flux = vec![0.0; n];
        for (j, f) in flux.iter_mut().enumerate() {
            let right = mu[(j + 1) % n];
            *f = diff * (right - mu[j]);
            if noise > 0.0 {
                let avg = 0.5 * (mu[j] + right);
                *f += noise * avg.max(0.0).sqrt() * stream.standard_normal();
            }
        }
        let cell_values = (0..n).map(|j| mu[j] + flux[j] - flux[(j + n - 1) % n]).collect();
        DensityField {
            cell_values,
            dt: self.dt,
            step_count: field.step_count + 1,
        }
    }

    pub fn run(&self, field: &DensityField, steps: usize, stream: &mut RngStream) -> DensityField {
        let mut f = field.clone();
        for _ in 0..steps {
            f = self.step(&f, stream);
        }
        f
    }
}

/// Earliest step with a negative cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativity {
    pub step: usize,
    pub cell: usize,
    pub value: f64,
}

pub fn first_negativity(
    field0: &DensityField,
    integrator: &Integrator,
    max_steps: usize,
    stream: &mut RngStream,
) -> Option<Negativity> {
    if let Some((cell, value)) = field0.first_negative_cell() {
        return Some(Negativity { step: 0, cell, value });
    }
    let mut f = field0.clone();
    for step in 1..=max_steps {
        f = integrator.step(&f, stream);
        if let Some((cell, value)) = f.first_negative_cell() {
            return Some(Negativity { step, cell, value });
        }
    }
    None
}

/// Independent trajectories from a uniform density; member `m` uses the
/// base stream of replicate `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownEnsemble {
    pub alpha: f64,
    pub grid_size: usize,
    /// `dt` as a fraction of the stability bound.
    pub dt_fraction: f64,
    pub noise_scale: f64,
    pub max_steps: usize,
    pub members: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub dt: f64,
    pub outcomes: Vec<Option<Negativity>>,
}

impl EnsembleReport {
    pub fn hits(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_some()).count()
    }

    /// Median first-negativity step, counting members without negativity
    /// as `max_steps + 1`.
    pub fn median_step(&self, max_steps: usize) -> f64 {
        let steps: Vec<f64> = self
            .outcomes
            .iter()
            .map(|o| o.map_or(max_steps as f64 + 1.0, |n| n.step as f64))
            .collect();
        median(&steps)
    }
}

impl BreakdownEnsemble {
    pub fn run(&self) -> Result<EnsembleReport> {
        self.run_from(&FourierFunction::constant(1.0))
    }

    /// Same as [`run`](Self::run) but starting from the midpoint samples of `rho`.
    pub fn run_from(&self, rho: &FourierFunction) -> Result<EnsembleReport> {
        let dom = TorusDomain::new(self.grid_size)?;
        require(
            self.dt_fraction > 0.0 && self.dt_fraction <= 1.0,
            "dt_fraction",
            "in (0, 1]",
            self.dt_fraction,
        )?;
        let dt = self.dt_fraction * Integrator::stability_bound(self.alpha, &dom);
        let integrator = Integrator::new(self.alpha, &dom, dt, self.noise_scale)?;
        let field0 = DensityField::from_function(&dom, rho, dt);
        let outcomes = par_map_ordered(self.members, |m| {
            let mut stream = RngStream::replicate(self.seed, m as u32);
            first_negativity(&field0, &integrator, self.max_steps, &mut stream)
        });
        Ok(EnsembleReport { dt, outcomes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> TorusDomain {
        TorusDomain::new(64).unwrap()
    }

    #[test]
    fn stability_is_checked() {
        let bound = Integrator::stability_bound(1.5, &dom());
        assert!(Integrator::new(1.5, &dom(), bound * 1.01, 1.0).is_err());
        assert!(Integrator::new(1.5, &dom(), bound, 1.0).is_ok());
    }

    #[test]
    fn mass_is_conserved() {
        let d = dom();
        let dt = 0.5 * Integrator::stability_bound(1.5, &d);
        let integ = Integrator::new(1.5, &d, dt, 0.3).unwrap();
        let f0 = DensityField::from_function(&d, &FourierFunction::new(1.0, vec![0.3], vec![0.2]), dt);
        let mut stream = RngStream::new(4, 0);
        let f = integ.run(&f0, 200, &mut stream);
        assert!((f.mass() - f0.mass()).abs() <= 1e-12 * f0.mass());
        assert_eq!(f.step_count, 200);
    }

    #[test]
    fn zero_noise_never_goes_negative() {
        let d = dom();
        let dt = 0.5 * Integrator::stability_bound(1.5, &d);
        let integ = Integrator::new(1.5, &d, dt, 0.0).unwrap();
        let f0 = DensityField::from_function(&d, &FourierFunction::new(1.0, vec![0.9], vec![]), dt);
        assert!(first_negativity(&f0, &integ, 5000, &mut RngStream::new(1, 0)).is_none());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let d = dom();
        let dt = 0.25 * Integrator::stability_bound(2.0, &d);
        let integ = Integrator::new(2.0, &d, dt, 0.05).unwrap();
        let f0 = DensityField::uniform(&d, dt);
        let a = integ.run(&f0, 50, &mut RngStream::new(9, 3));
        let b = integ.run(&f0, 50, &mut RngStream::new(9, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn initial_negativity_is_step_zero() {
        let d = dom();
        let dt = 0.5 * Integrator::stability_bound(1.0, &d);
        let integ = Integrator::new(1.0, &d, dt, 1.0).unwrap();
        let f0 = DensityField::from_function(&d, &FourierFunction::new(1.0, vec![1.5], vec![]), dt);
        let neg = first_negativity(&f0, &integ, 10, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(neg.step, 0);
    }
}
