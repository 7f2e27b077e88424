//! Occupation probabilities `h = P_t 1_A` for finite unions of arcs.

use std::f64::consts::SQRT_2;

use libm::erfc;

use crate::error::{require, Error, Result};
use crate::torus::{wrap, TorusDomain};
use crate::vhj::EXTREMA_OVERSAMPLE;

/// A finite union of pairwise disjoint half-open arcs `[a, b)` of the
/// torus. An arc with `b < a` wraps through 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    /// `(start, length)` sorted by start.
    arcs: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidSet("at least one interval is required".into()));
        }
        let mut arcs = Vec::with_capacity(intervals.len());
        for &(a, b) in intervals {
            if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidSet(format!("endpoints ({a}, {b}) must lie in [0, 1)")));
            }
            if a == b {
                return Err(Error::InvalidSet(format!("interval [{a}, {b}) is empty")));
            }
            arcs.push((a, wrap(b - a)));
        }
        arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let total: f64 = arcs.iter().map(|a| a.1).sum();
        if total >= 1.0 {
            return Err(Error::InvalidSet(format!("intervals cover the whole torus (length {total})")));
        }
        for i in 0..arcs.len() {
            let (s, l) = arcs[i];
            let (next, _) = arcs[(i + 1) % arcs.len()];
            let gap = wrap(next - s);
            if arcs.len() > 1 && gap < l {
                return Err(Error::InvalidSet(format!("interval starting at {s} overlaps the one starting at {next}")));
            }
        }
        Ok(Self { arcs })
    }

    /// The arc of length `coverage` centred at `center`.
    pub fn centered(center: f64, coverage: f64) -> Result<Self> {
        if !(coverage > 0.0 && coverage < 1.0) {
            return Err(Error::InvalidSet(format!("coverage {coverage} must lie in (0, 1)")));
        }
        let a = wrap(center - 0.5 * coverage);
        let b = wrap(center + 0.5 * coverage);
        Self::new(&[(a, b)])
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|a| a.1).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.arcs.iter().any(|&(s, l)| wrap(x - s) < l)
    }

    /// Endpoint pairs `(a, b)` as accepted by [`IntervalSet::new`].
    pub fn endpoints(&self) -> Vec<(f64, f64)> {
        self.arcs.iter().map(|&(s, l)| (s, wrap(s + l))).collect()
    }
}

/// `P(lo ≤ Z < hi)` for a standard normal `Z`, accurate in both tails.
fn normal_interval(lo: f64, hi: f64) -> f64 {
    let q = |x: f64| 0.5 * erfc(x / SQRT_2);
    if lo >= 0.0 {
        (q(lo) - q(hi)).max(0.0)
    } else if hi <= 0.0 {
        (q(-hi) - q(-lo)).max(0.0)
    } else {
        1.0 - q(-lo) - q(hi)
    }
}

/// `h(x) = P_t 1_A(x)` for the heat semigroup of `(diffusivity/2)Δ`,
/// evaluated in closed form as a sum over images of the Gaussian kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationFunction {
    pub set: IntervalSet,
    pub t: f64,
    pub diffusivity: f64,
    pub domain: TorusDomain,
    /// `h` on the grid nodes.
    pub h_values: Vec<f64>,
    /// `1 − sup h` over the grid refined four times.
    pub delta: f64,
    pub min_h: f64,
}

impl OccupationFunction {
    pub fn new(set: IntervalSet, t: f64, diffusivity: f64, domain: TorusDomain) -> Result<Self> {
        require(t > 0.0 && t.is_finite(), "t", "positive and finite", t)?;
        require(diffusivity > 0.0 && diffusivity.is_finite(), "diffusivity", "positive", diffusivity)?;
        let mut occ = Self {
            set,
            t,
            diffusivity,
            domain,
            h_values: Vec::new(),
            delta: 0.0,
            min_h: 0.0,
        };
        occ.h_values = domain.points().iter().map(|&x| occ.h_at(x)).collect();
        let fine: Vec<f64> = domain
            .refined(EXTREMA_OVERSAMPLE)
            .points()
            .iter()
            .map(|&x| occ.h_at(x))
            .collect();
        let (lo, hi) = crate::fourier::extrema(&fine);
        occ.delta = 1.0 - hi;
        occ.min_h = lo;
        if occ.delta <= 0.0 {
            return Err(Error::InvalidSet(format!(
                "occupation probability reaches 1 (delta = {}); shrink the set or increase t",
                occ.delta
            )));
        }
        Ok(occ)
    }

    pub fn sigma(&self) -> f64 {
        (self.diffusivity * self.t).sqrt()
    }

    /// `P(x + σZ ∈ A mod 1)` with `σ² = diffusivity · t`.
    pub fn h_at(&self, x: f64) -> f64 {
        let sigma = self.sigma();
        let reach = 40.0 * sigma;
        let mut total = 0.0;
        for &(start, len) in self.set.arcs() {
            let base = start - wrap(x);
            let m_lo = (-base - len - reach).floor() as i64;
            let m_hi = (-base + reach).ceil() as i64;
            for m in m_lo..=m_hi {
                let lo = base + m as f64;
                total += normal_interval(lo / sigma, (lo + len) / sigma);
            }
        }
        total.min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> TorusDomain {
        TorusDomain::new(64).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(IntervalSet::new(&[]).is_err());
        assert!(IntervalSet::new(&[(0.2, 0.2)]).is_err());
        assert!(IntervalSet::new(&[(0.1, 1.2)]).is_err());
        assert!(IntervalSet::new(&[(0.1, 0.4), (0.3, 0.5)]).is_err());
        assert!(IntervalSet::new(&[(0.9, 0.2), (0.1, 0.3)]).is_err());
        let s = IntervalSet::new(&[(0.9, 0.1), (0.4, 0.5)]).unwrap();
        assert!((s.measure() - 0.3).abs() < 1e-15);
        assert!(s.contains(0.95) && s.contains(0.05) && s.contains(0.45));
        assert!(!s.contains(0.1) && !s.contains(0.5) && !s.contains(0.2));
    }

    #[test]
    fn centered_set() {
        let s = IntervalSet::centered(0.05, 0.3).unwrap();
        assert!(s.contains(0.95) && s.contains(0.15) && !s.contains(0.25));
        assert!((s.measure() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn h_integrates_to_set_measure() {
        // ∫ P_t 1_A dx = |A| by symmetry of the kernel.
        let set = IntervalSet::new(&[(0.1, 0.35), (0.6, 0.7)]).unwrap();
        let occ = OccupationFunction::new(set, 0.02, 1.5, TorusDomain::new(1024).unwrap()).unwrap();
        let mean = occ.h_values.iter().sum::<f64>() / 1024.0;
        assert!((mean - 0.35).abs() < 1e-12, "{mean}");
        assert!(occ.delta > 0.0 && occ.min_h > 0.0);
    }

    #[test]
    fn h_matches_fourier_series() {
        // P_t 1_[a,b): mean b−a, mode k has coefficients
        // (sin 2πkb − sin 2πka)/(πk) and (cos 2πka − cos 2πkb)/(πk), damped by e^{−(D/2)(2πk)²t}.
        let (a, b, t, d) = (0.2, 0.45, 0.01, 2.0);
        let occ = OccupationFunction::new(IntervalSet::new(&[(a, b)]).unwrap(), t, d, dom()).unwrap();
        let tau = std::f64::consts::TAU;
        for x in [0.0, 0.3, 0.44, 0.8] {
            let mut v = b - a;
            for k in 1..200 {
                let kf = k as f64;
                let damp = (-0.5 * d * (tau * kf).powi(2) * t).exp();
                let ck = ((tau * kf * b).sin() - (tau * kf * a).sin()) / (std::f64::consts::PI * kf);
                let sk = ((tau * kf * a).cos() - (tau * kf * b).cos()) / (std::f64::consts::PI * kf);
                v += damp * (ck * (tau * kf * x).cos() + sk * (tau * kf * x).sin());
            }
            assert!((occ.h_at(x) - v).abs() < 1e-13, "x = {x}: {} vs {v}", occ.h_at(x));
        }
    }

    #[test]
    fn requires_positive_time() {
        let set = IntervalSet::new(&[(0.2, 0.4)]).unwrap();
        assert!(OccupationFunction::new(set, 0.0, 1.0, dom()).is_err());
    }
}
