//! Truncated formal power series with double-double coefficients.

use crate::dd::DoubleDouble;

/// `Σ_{k<order} c_k s^k`, all arithmetic truncated at `order` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<DoubleDouble>,
}

impl PowerSeries {
    pub fn new(mut coeffs: Vec<DoubleDouble>, order: usize) -> Self {
        coeffs.resize(order, DoubleDouble::ZERO);
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    /// `c0 + c1 s`.
    pub fn linear(c0: DoubleDouble, c1: DoubleDouble, order: usize) -> Self {
        Self::new(vec![c0, c1], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[DoubleDouble] {
        &self.coeffs
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect();
        Self { coeffs }
    }

    pub fn scale(&self, factor: DoubleDouble) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = vec![DoubleDouble::ZERO; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `exp` of the series, from `E′ = L′E`: `k e_k = Σ_{j=1}^{k} j l_j e_{k−j}`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return self.clone();
        }
        let l = &self.coeffs;
        let mut e = vec![DoubleDouble::ZERO; n];
        e[0] = l[0].exp();
        for k in 1..n {
            let mut acc = DoubleDouble::ZERO;
            for j in 1..=k {
                acc = acc + DoubleDouble::from_f64(j as f64) * l[j] * e[k - j];
            }
            e[k] = acc / DoubleDouble::from_f64(k as f64);
        }
        Self { coeffs: e }
    }

    /// Natural logarithm of a series with positive constant term, from
    /// `F L′ = F′`: `k f_0 l_k = k f_k − Σ_{j=1}^{k−1} j l_j f_{k−j}`.
    pub fn ln(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return self.clone();
        }
        let f = &self.coeffs;
        assert!(f[0].hi() > 0.0, "logarithm needs a positive constant term");
        let mut l = vec![DoubleDouble::ZERO; n];
        l[0] = f[0].ln();
        for k in 1..n {
            let kk = DoubleDouble::from_f64(k as f64);
            let mut acc = kk * f[k];
            for j in 1..k {
                acc = acc - DoubleDouble::from_f64(j as f64) * l[j] * f[k - j];
            }
            l[k] = acc / (kk * f[0]);
        }
        Self { coeffs: l }
    }
}
