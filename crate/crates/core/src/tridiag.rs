//! Thomas-algorithm factorization for tridiagonal systems with fixed
//! coefficients, reused across time steps.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    const ONE: Self;
    const ZERO: Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    const ONE: Self = 1.0;
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const ONE: Self = Complex64::new(1.0, 0.0);
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factors of a tridiagonal matrix `(lower, diag, upper)`, where
/// `lower[i]` multiplies `x[i-1]` in row `i` and `upper[i]` multiplies `x[i+1]`.
#[derive(Debug, Clone)]
pub(crate) struct Thomas<T> {
    lower: Vec<T>,
    c_prime: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Scalar> Thomas<T> {
    pub fn factor(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n);
        let mut c_prime = vec![T::ZERO; n];
        let mut inv_pivot = vec![T::ZERO; n];
        let mut prev_c = T::ZERO;
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - lower[i] * prev_c };
            if pivot.modulus() < 1e-300 || !pivot.modulus().is_finite() {
                return Err(Error::NumericalAbort {
                    step: 0,
                    reason: format!("singular tridiagonal pivot at row {i}"),
                });
            }
            inv_pivot[i] = T::ONE / pivot;
            c_prime[i] = upper[i] * inv_pivot[i];
            prev_c = c_prime[i];
        }
        Ok(Thomas { lower: lower.to_vec(), c_prime, inv_pivot })
    }

    /// Solve in place: `rhs` becomes the solution.
    pub fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.c_prime.len());
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.c_prime[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_random_diagonally_dominant_system() {
        let n = 50;
        let lower: Vec<Complex64> = (0..n).map(|i| Complex64::new(0.3 * (i as f64).sin(), 0.1)).collect();
        let upper: Vec<Complex64> = (0..n).map(|i| Complex64::new(-0.2, 0.4 * (i as f64).cos())).collect();
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(2.0 + i as f64 * 0.01, 1.0)).collect();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let t = Thomas::factor(&lower, &diag, &upper).unwrap();
        t.solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_is_reported() {
        assert!(Thomas::factor(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]).is_err());
    }
}
