//! Deterministic reductions and small statistical helpers.
//!
//! Replicates are evaluated in parallel but always collected in index
//! order and reduced with a fixed pairwise summation tree, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;

/// Evaluates `f(0..count)` in parallel and returns results in index order.
pub fn par_map_ordered<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Mean, unbiased variance and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                count: 0,
                mean: f64::NAN,
                variance: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let variance = if n > 1 { pairwise_sum(&sq) / (n - 1) as f64 } else { 0.0 };
        Self {
            count: n,
            mean,
            variance,
            stderr: (variance / n as f64).sqrt(),
        }
    }
}

/// `(estimate - target) / stderr`, with the degenerate zero-variance case
/// mapped to 0 when the two agree to `exact_tol` and to ±∞ otherwise.
pub fn z_score(estimate: f64, target: f64, stderr: f64, exact_tol: f64) -> f64 {
    let diff = estimate - target;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= exact_tol {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Median of a slice of finite values (upper median for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn summary_of_constant_has_zero_error() {
        let s = Summary::of(&[0.25; 10]);
        assert_eq!(s.mean, 0.25);
        assert_eq!(s.stderr, 0.0);
    }

    #[test]
    fn summary_known_values() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn z_score_degenerate_cases() {
        assert_eq!(z_score(1.0, 1.0, 0.0, 1e-12), 0.0);
        assert_eq!(z_score(1.1, 1.0, 0.0, 1e-12), f64::INFINITY);
        assert!((z_score(1.3, 1.0, 0.1, 0.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_map_is_ordered() {
        let v = par_map_ordered(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
