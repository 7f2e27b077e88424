//! FFT plumbing between grid samples and real Fourier coefficients.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Complex coefficients `c_k = (1/N) Σ_j x_j e^{-2πi jk/N}` of periodic samples.
pub(crate) fn forward(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`forward`]: real part of `Σ_k c_k e^{2πi jk/N}`.
pub(crate) fn inverse(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    coeffs.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT bin `j` on an `n`-point grid; the Nyquist bin
/// is reported as `None` since it has no real derivative.
fn wavenumber(j: usize, n: usize) -> Option<f64> {
    if 2 * j == n {
        None
    } else if 2 * j < n {
        Some(j as f64)
    } else {
        Some(j as f64 - n as f64)
    }
}

/// First and second derivatives of periodic samples on the unit torus,
/// computed spectrally. The Nyquist mode is discarded.
pub fn spectral_derivatives(samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let c = forward(samples);
    let two_pi = std::f64::consts::TAU;
    let mut d1 = vec![Complex64::new(0.0, 0.0); n];
    let mut d2 = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        if let Some(k) = wavenumber(j, n) {
            let ik = Complex64::new(0.0, two_pi * k);
            d1[j] = c[j] * ik;
            d2[j] = c[j] * ik * ik;
        }
    }
    (inverse(d1), inverse(d2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_trig_polynomial() {
        let n = 64;
        let xs: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let tau = std::f64::consts::TAU;
        let f: Vec<f64> = xs.iter().map(|x| (tau * 3.0 * x).sin()).collect();
        let (d1, d2) = spectral_derivatives(&f);
        for (j, x) in xs.iter().enumerate() {
            assert!((d1[j] - 3.0 * tau * (tau * 3.0 * x).cos()).abs() < 1e-10);
            assert!((d2[j] + 9.0 * tau * tau * (tau * 3.0 * x).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let x = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.5, -1.0, 2.0];
        let back = inverse(forward(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
