//! The unit torus `[0, 1)` with a uniform sampling grid.

use crate::error::{Error, Result};

/// Periodic one-dimensional state space of length 1, sampled on
/// `grid_size` uniform cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusDomain {
    grid_size: usize,
}

impl TorusDomain {
    pub fn new(grid_size: usize) -> Result<Self> {
        if grid_size < 8 || !grid_size.is_power_of_two() {
            return Err(Error::InvalidGrid(grid_size));
        }
        Ok(Self { grid_size })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.grid_size as f64
    }

    /// Grid nodes `j / grid_size`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.grid_size as f64;
        (0..self.grid_size).map(|j| j as f64 / n).collect()
    }

    /// The same torus with `factor` times as many cells. Every node of
    /// `self` is a node of the refined grid.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            grid_size: self.grid_size * factor.max(1).next_power_of_two(),
        }
    }
}

/// Reduces a coordinate into `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed distance from `a` to `b` along the shorter arc, in `[-1/2, 1/2)`.
pub fn periodic_offset(a: f64, b: f64) -> f64 {
    wrap(b - a + 0.5) - 0.5
}
