//! Outgoing free-space Green function e^{ik|x|}/(4π|x|) and a stencil residual check.

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub fn green_function_3d(x: [f64; 3], k: Complex64) -> Result<Complex64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("Green function is singular at the origin"));
    }
    Ok((Complex64::i() * k * r).exp() / (4.0 * std::f64::consts::PI * r))
}

/// (∇² + k²)G at `x` from the 7-point stencil with spacing `h`.
pub fn green_residual(x: [f64; 3], k: Complex64, h: f64) -> Result<Complex64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if !(h > 0.0) || h >= r {
        return Err(invalid(format!("stencil spacing must satisfy 0 < h < |x|, got h = {h}, |x| = {r}")));
    }
    let g0 = green_function_3d(x, k)?;
    let mut lap = Complex64::new(0.0, 0.0);
    for a in 0..3 {
        let mut p = x;
        let mut m = x;
        p[a] += h;
        m[a] -= h;
        lap += green_function_3d(p, k)? + green_function_3d(m, k)? - 2.0 * g0;
    }
    Ok(lap / (h * h) + k * k * g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn values() {
        let k0 = green_function_3d([1.0, 0.0, 0.0], Complex64::new(0.0, 0.0)).unwrap();
        assert!((k0.re - 1.0 / (4.0 * PI)).abs() < 1e-15 && k0.im == 0.0);
        let k1 = green_function_3d([0.0, 0.6, 0.8], Complex64::new(1.0, 0.0)).unwrap();
        assert!((k1 - Complex64::new(1f64.cos(), 1f64.sin()) / (4.0 * PI)).norm() < 1e-15);
        assert!((k1.re - 0.042995891).abs() < 1e-9 && (k1.im - 0.066962133).abs() < 1e-9);
        assert!(green_function_3d([0.0; 3], Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn residual_small_and_converging() {
        let k = Complex64::new(1.0, 0.0);
        let x = [2.0, 0.0, 0.0];
        let g = green_function_3d(x, k).unwrap();
        assert!(green_residual(x, k, 1e-3).unwrap().norm() <= 1e-4 * g.norm());
        let x = [0.7, -0.5, 0.6];
        let r1 = green_residual(x, k, 0.1).unwrap().norm();
        let r2 = green_residual(x, k, 0.05).unwrap().norm();
        assert!(r1 / r2 >= 3.5, "{}", r1 / r2);
        // a damped diffusion wavenumber behaves the same way
        let kappa = Complex64::new(1.0, 1.0);
        let r1 = green_residual(x, kappa, 0.1).unwrap().norm();
        let r2 = green_residual(x, kappa, 0.05).unwrap().norm();
        assert!(r1 / r2 >= 3.5);
    }
}
