//! Tridiagonal elimination (Thomas algorithm).

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting: the callers only
/// build diagonally dominant or symmetric positive definite systems.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    for len in [lower.len(), upper.len(), rhs.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singular { row: 0 });
    }
    c.push(upper[0] / denom);
    d.push(rhs[0] / denom);
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular { row: i });
        }
        c.push(if i + 1 < n { upper[i] / denom } else { 0.0 });
        d.push((rhs[i] - lower[i] * d[i - 1]) / denom);
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let n = 9;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.2 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = diag[i] * x_true[i];
                if i > 0 {
                    s += lower[i] * x_true[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x_true[i + 1];
                }
                s
            })
            .collect();
        let x = solve(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let r = solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(r, Err(Error::Singular { row: 0 }));
    }
}
