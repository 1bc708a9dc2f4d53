use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fields::{divergence, gradient, RealField};
use crate::schrodinger::PhysicalConstants;

/// Drive frequency and diffusivity with the derived diffusion length
/// L = √(2D/ω) and complex wavenumber κ = (1+i)/L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DwfParameters {
    pub omega: f64,
    pub diffusivity: f64,
    pub length: f64,
    pub kappa: Complex64,
}

impl DwfParameters {
    pub fn kappa_sq(&self) -> Complex64 {
        self.kappa * self.kappa
    }

    /// |κ² - iω/D| relative to ω/D.
    pub fn kappa_defect(&self) -> f64 {
        let target = Complex64::new(0.0, self.omega / self.diffusivity);
        (self.kappa_sq() - target).norm() / target.norm()
    }
}

pub fn dwf_parameters(omega: f64, diffusivity: f64) -> Result<DwfParameters> {
    if !(omega > 0.0 && omega.is_finite()) || !(diffusivity > 0.0 && diffusivity.is_finite()) {
        return Err(invalid(format!("ω and D must be positive, got ω = {omega}, D = {diffusivity}")));
    }
    let length = (2.0 * diffusivity / omega).sqrt();
    Ok(DwfParameters { omega, diffusivity, length, kappa: Complex64::new(1.0, 1.0) / length })
}

/// Fickian currents J_forward = -D∇P and J_osmotic = +D∇P with their divergences.
#[derive(Debug, Clone)]
pub struct FickCurrents {
    pub forward: Vec<RealField>,
    pub osmotic: Vec<RealField>,
    pub div_forward: RealField,
    pub div_osmotic: RealField,
}

pub fn fick_currents(p: &RealField, c: &PhysicalConstants) -> Result<FickCurrents> {
    p.ensure_finite()?;
    if p.values().iter().any(|&v| v < 0.0) {
        return Err(invalid("density has negative samples"));
    }
    let d = c.diffusivity();
    let grad = gradient(p)?;
    let forward: Vec<RealField> = grad.iter().map(|g| g.scaled(-d).with_label("J_forward")).collect();
    let osmotic: Vec<RealField> = grad.iter().map(|g| g.scaled(d).with_label("J_osmotic")).collect();
    let div_forward = divergence(&forward)?.with_label("div_J_forward");
    let div_osmotic = div_forward.scaled(-1.0).with_label("div_J_osmotic");
    Ok(FickCurrents { forward, osmotic, div_forward, div_osmotic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use proptest::prelude::*;

    #[test]
    fn parameter_examples() {
        let p = dwf_parameters(2.0, 1.0).unwrap();
        assert_eq!(p.length, 1.0);
        assert_eq!(p.kappa, Complex64::new(1.0, 1.0));
        assert!((p.kappa_sq() - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let q = dwf_parameters(1.0, 0.5).unwrap();
        assert!((q.length - 1.0).abs() < 1e-15);
        let r = dwf_parameters(4.0, 0.5).unwrap();
        assert!((r.length - 0.5).abs() < 1e-15);
        assert!(dwf_parameters(0.0, 1.0).is_err());
        assert!(dwf_parameters(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn kappa_squared_is_i_omega_over_d(omega in 1e-3f64..1e3, d in 1e-3f64..1e3) {
            let p = dwf_parameters(omega, d).unwrap();
            prop_assert!(p.kappa_defect() < 1e-14);
        }
    }

    #[test]
    fn fick_examples() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(-8.0, 8.0, 1601).unwrap();
        let flat = RealField::from_fn(&g, |_| 1.0 / 16.0);
        let f = fick_currents(&flat, &c).unwrap();
        assert!(f.forward[0].max_magnitude() < 1e-14 && f.osmotic[0].max_magnitude() < 1e-14);

        let gauss = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let p = RealField::from_fn(&g, |x| gauss(x[0]));
        let f = fick_currents(&p, &c).unwrap();
        assert!((f.forward[0].values()[900] - 0.5 * gauss(1.0)).abs() < 2e-5);
        for (a, b) in f.forward[0].values().iter().zip(f.osmotic[0].values()) {
            assert_eq!(a + b, 0.0);
        }
    }
}
