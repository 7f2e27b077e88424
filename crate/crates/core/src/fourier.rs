//! Finite Fourier sums on the unit torus and the exact action of the
//! Laplacian, its heat semigroup and its carré du champ on them.
//!
//! A [`FourierFunction`] is
//!
//! ```text
//! f(x) = mean + Σ_{k=1}^{K} (a_k cos 2πkx + b_k sin 2πkx)
//! ```
//!
//! With `L = Δ` every mode is an eigenfunction, so `L f`, `P_t f` and
//! `Γ(f, g) = f′g′` are all computed without discretization error.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;

use crate::error::{require, Result};
use crate::spectral;
use crate::torus::TorusDomain;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierFunction {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierFunction {
    /// Builds `mean + Σ a_k cos 2πkx + b_k sin 2πkx`; `cos[k-1]` and
    /// `sin[k-1]` hold mode `k`. The shorter array is zero-padded.
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let m = cos.len().max(sin.len());
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(m, 0.0);
        sin.resize(m, 0.0);
        Self { mean, cos, sin }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, Vec::new(), Vec::new())
    }

    /// `amplitude · cos 2πkx`, `k ≥ 1`.
    pub fn cosine(k: usize, amplitude: f64) -> Self {
        assert!(k >= 1, "mode index starts at 1");
        let mut cos = vec![0.0; k];
        cos[k - 1] = amplitude;
        Self::new(0.0, cos, Vec::new())
    }

    /// `amplitude · sin 2πkx`, `k ≥ 1`.
    pub fn sine(k: usize, amplitude: f64) -> Self {
        assert!(k >= 1, "mode index starts at 1");
        let mut sin = vec![0.0; k];
        sin[k - 1] = amplitude;
        Self::new(0.0, Vec::new(), sin)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn max_mode(&self) -> usize {
        self.cos.len()
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }

    /// True when every oscillating coefficient is zero.
    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (s1, c1) = (TAU * x).sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        let mut acc = self.mean;
        for (a, b) in self.cos.iter().zip(&self.sin) {
            // (c + i s) ← (c + i s)(c1 + i s1)
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            acc += a * c + b * s;
        }
        acc
    }

    fn map_modes(&self, mean: f64, factor: impl Fn(usize) -> (f64, f64, f64, f64)) -> Self {
        // factor(k) = (aa, ab, ba, bb): new_a = aa·a + ab·b, new_b = ba·a + bb·b
        let mut cos = Vec::with_capacity(self.cos.len());
        let mut sin = Vec::with_capacity(self.sin.len());
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (aa, ab, ba, bb) = factor(i + 1);
            cos.push(aa * a + ab * b);
            sin.push(ba * a + bb * b);
        }
        Self { mean, cos, sin }
    }

    pub fn derivative(&self) -> Self {
        self.map_modes(0.0, |k| {
            let w = TAU * k as f64;
            (0.0, w, -w, 0.0)
        })
    }

    /// The generator `L = Δ`: mode `k` is multiplied by `-(2πk)²`.
    pub fn generator_l(&self) -> Self {
        self.map_modes(0.0, |k| {
            let lam = -(TAU * k as f64).powi(2);
            (lam, 0.0, 0.0, lam)
        })
    }

    /// Heat semigroup with generator `(diffusivity / 2) Δ` at time `t`.
    pub fn heat_semigroup(&self, diffusivity: f64, t: f64) -> Result<Self> {
        require(t >= 0.0 && t.is_finite(), "t", "finite and nonnegative", t)?;
        require(diffusivity > 0.0 && diffusivity.is_finite(), "diffusivity", "positive", diffusivity)?;
        Ok(self.map_modes(self.mean, |k| {
            let d = (-0.5 * diffusivity * (TAU * k as f64).powi(2) * t).exp();
            (d, 0.0, 0.0, d)
        }))
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.max_mode().max(other.max_mode());
        let mut cos = vec![0.0; m];
        let mut sin = vec![0.0; m];
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            cos[i] += a;
            sin[i] += b;
        }
        for (i, (a, b)) in other.cos.iter().zip(&other.sin).enumerate() {
            cos[i] += a;
            sin[i] += b;
        }
        Self::new(self.mean + other.mean, cos, sin)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_modes(self.mean * factor, |_| (factor, 0.0, 0.0, factor))
    }

    /// Complex coefficients `c_{-K..=K}` stored at index `k + K`.
    fn complex_coeffs(&self) -> Vec<Complex64> {
        let k_max = self.max_mode();
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        c[k_max] = Complex64::new(self.mean, 0.0);
        for k in 1..=k_max {
            let ck = Complex64::new(0.5 * self.cos[k - 1], -0.5 * self.sin[k - 1]);
            c[k_max + k] = ck;
            c[k_max - k] = ck.conj();
        }
        c
    }

    /// Exact pointwise product; the result has `max_mode` equal to the sum
    /// of the operands' max modes.
    pub fn mul(&self, other: &Self) -> Self {
        let (ka, kb) = (self.max_mode(), other.max_mode());
        let (ca, cb) = (self.complex_coeffs(), other.complex_coeffs());
        let k_max = ka + kb;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        for (i, a) in ca.iter().enumerate() {
            for (j, b) in cb.iter().enumerate() {
                // index i - ka + j - kb + k_max
                out[i + j] += a * b;
            }
        }
        let mean = out[k_max].re;
        let cos = (1..=k_max).map(|k| 2.0 * out[k_max + k].re).collect();
        let sin = (1..=k_max).map(|k| -2.0 * out[k_max + k].im).collect();
        Self::new(mean, cos, sin)
    }

    /// Samples on the grid nodes of `dom`.
    pub fn sample(&self, dom: &TorusDomain) -> Vec<f64> {
        self.sample_n(dom.grid_size())
    }

    pub(crate) fn sample_n(&self, n: usize) -> Vec<f64> {
        if 2 * self.max_mode() >= n {
            return (0..n).map(|j| self.eval(j as f64 / n as f64)).collect();
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        spec[0] = Complex64::new(self.mean, 0.0);
        for k in 1..=self.max_mode() {
            let ck = Complex64::new(0.5 * self.cos[k - 1], -0.5 * self.sin[k - 1]);
            spec[k] = ck;
            spec[n - k] = ck.conj();
        }
        spectral::inverse(spec)
    }

    /// Least-squares projection of periodic grid samples onto modes
    /// `0..=max_mode`. Requires `max_mode < samples.len() / 2`.
    pub fn from_samples(samples: &[f64], max_mode: usize) -> Self {
        let n = samples.len();
        assert!(2 * max_mode < n, "max_mode {max_mode} must stay below the Nyquist mode of {n} samples");
        let c = spectral::forward(samples);
        let cos = (1..=max_mode).map(|k| 2.0 * c[k].re).collect();
        let sin = (1..=max_mode).map(|k| -2.0 * c[k].im).collect();
        Self::new(c[0].re, cos, sin)
    }

    /// Minimum and maximum over the nodes of `dom` refined by `oversample`.
    pub fn grid_extrema(&self, dom: &TorusDomain, oversample: usize) -> (f64, f64) {
        extrema(&self.sample(&dom.refined(oversample)))
    }
}

pub(crate) fn extrema(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Pointwise evaluator of the carré du champ `Γ(f, g) = f′ g′` of `L = Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarreDuChamp {
    df: FourierFunction,
    dg: FourierFunction,
}

impl CarreDuChamp {
    pub fn eval(&self, x: f64) -> f64 {
        self.df.eval(x) * self.dg.eval(x)
    }

    pub fn sample(&self, dom: &TorusDomain) -> Vec<f64> {
        self.df
            .sample(dom)
            .into_iter()
            .zip(self.dg.sample(dom))
            .map(|(a, b)| a * b)
            .collect()
    }

    /// `f′g′` as an exact Fourier sum.
    pub fn to_fourier(&self) -> FourierFunction {
        self.df.mul(&self.dg)
    }
}

pub fn carre_du_champ(f: &FourierFunction, g: &FourierFunction) -> CarreDuChamp {
    CarreDuChamp {
        df: f.derivative(),
        dg: g.derivative(),
    }
}
