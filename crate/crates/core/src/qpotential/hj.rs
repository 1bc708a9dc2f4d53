//! Modified Hamilton–Jacobi residual ∂S/∂t + |∇S|²/2m + V + U along a ψ stack.

use num_complex::Complex64;

use super::forms::quantum_potential_canonical;
use super::madelung::decompose;
use crate::error::{Error, Result};
use crate::fields::{FieldStack, RealField};
use crate::schrodinger::PhysicalConstants;

/// Largest per-sample phase increment accepted before aliasing is assumed.
pub const MAX_PHASE_INCREMENT: f64 = std::f64::consts::FRAC_PI_2;

/// Residual frames for every sample with neighbours on both sides. ∂S/∂t is
/// taken from per-cell phase increments arg(ψ(t₂)ψ*(t₁)), so no unwrapping
/// is needed; node cells are masked.
pub fn hamilton_jacobi_residual(
    psi: &FieldStack<Complex64>,
    v: &RealField,
    c: &PhysicalConstants,
    eps_node: f64,
) -> Result<FieldStack<f64>> {
    if psi.len() < 3 {
        return Err(Error::InvalidArgument(format!("Hamilton–Jacobi residual needs ≥ 3 samples, got {}", psi.len())));
    }
    psi.grid().check_same(v.grid())?;
    let t = psi.times();
    let hbar = c.hbar();
    let mut out = FieldStack::new(psi.grid().clone());
    for k in 1..psi.len() - 1 {
        let (a, b, z) = (psi.get(k - 1).values(), psi.get(k).values(), psi.get(k + 1).values());
        let dec = decompose(psi.get(k), hbar, eps_node)?;
        let u = quantum_potential_canonical(&dec, c)?.field;
        let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let mut vals = vec![0.0; psi.grid().len()];
        for (i, val) in vals.iter_mut().enumerate() {
            if dec.node_mask[i] {
                continue;
            }
            let d0 = (b[i] * a[i].conj()).arg();
            let d1 = (z[i] * b[i].conj()).arg();
            if d0.abs() > MAX_PHASE_INCREMENT || d1.abs() > MAX_PHASE_INCREMENT {
                return Err(Error::InvalidArgument(format!(
                    "phase increment {:.3} rad at cell {i}, t = {} exceeds π/2; sample the stack more densely",
                    d0.abs().max(d1.abs()),
                    t[k]
                )));
            }
            let ds_dt = hbar * (h0 * h0 * d1 + h1 * h1 * d0) / (h0 * h1 * (h0 + h1));
            let grad_sq: f64 = dec.s_gradient.iter().map(|g| g.values()[i].powi(2)).sum();
            *val = ds_dt + grad_sq / (2.0 * c.mass()) + v.values()[i] + u.values()[i];
        }
        let f = RealField::new(psi.grid().clone(), vals)?.with_label("hj_residual").with_mask(Some(dec.node_mask));
        out.push(t[k], f)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ComplexField, Grid};
    use crate::qpotential::DEFAULT_NODE_EPSILON;
    use crate::schrodinger::{gaussian_packet, CrankNicolson, PotentialSpec, WavePacketSpec};
    use std::f64::consts::PI;

    #[test]
    fn stationary_well_mode_balances() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(0.0, 1.0, 512).unwrap();
        let well = PotentialSpec::InfiniteWell { left: 0.0, right: 1.0 };
        let psi0 = ComplexField::from_fn(&g, |p| Complex64::new(2f64.sqrt() * (PI * p[0]).sin(), 0.0));
        let cn = CrankNicolson::new(&g, &well, &c, 1e-4).unwrap();
        let stack = cn.evolve(&psi0, 20, 1).unwrap();
        let r = hamilton_jacobi_residual(&stack, &well.sample(&g).unwrap(), &c, DEFAULT_NODE_EPSILON).unwrap();
        assert_eq!(r.len(), 19);
        let e1 = PI * PI / 2.0;
        for f in r.fields() {
            assert!(f.max_magnitude_interior(3) <= 1e-3 * e1, "{}", f.max_magnitude_interior(3));
        }
    }

    #[test]
    fn evolved_gaussian_is_consistent() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(-20.0, 20.0, 2048).unwrap();
        let psi0 = gaussian_packet(&WavePacketSpec::new(-3.0, 1.0, 1.5), &c, 0.0, &g).unwrap().psi;
        let cn = CrankNicolson::new(&g, &PotentialSpec::Free, &c, 1e-3).unwrap();
        let stack = cn.evolve(&psi0, 200, 1).unwrap();
        let r = hamilton_jacobi_residual(&stack, &RealField::zeros(&g), &c, DEFAULT_NODE_EPSILON).unwrap();
        for (k, f) in r.fields().iter().enumerate().step_by(50) {
            let dec = decompose(stack.get(k + 1), 1.0, DEFAULT_NODE_EPSILON).unwrap();
            let umax = quantum_potential_canonical(&dec, &c).unwrap().field.max_magnitude_interior(3);
            let worst = f.max_magnitude_interior(3);
            assert!(worst <= 1e-2 * umax, "{k}: {worst} vs {umax}");
        }
    }

    #[test]
    fn plane_wave_dispersion() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(0.0, 10.0, 200).unwrap();
        let k = 1.3;
        let mut s = FieldStack::new(g.clone());
        for n in 0..4 {
            let t = 0.05 * n as f64;
            s.push(t, ComplexField::from_fn(&g, |p| Complex64::from_polar(1.0, k * p[0] - 0.5 * k * k * t))).unwrap();
        }
        let r = hamilton_jacobi_residual(&s, &RealField::zeros(&g), &c, DEFAULT_NODE_EPSILON).unwrap();
        assert!(r.fields().iter().all(|f| f.max_magnitude() < 1e-9));
    }

    #[test]
    fn aliasing_is_rejected() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(0.0, 1.0, 32).unwrap();
        let mut s = FieldStack::new(g.clone());
        for n in 0..3 {
            s.push(n as f64, ComplexField::from_fn(&g, |_| Complex64::from_polar(1.0, 2.0 * n as f64))).unwrap();
        }
        assert!(hamilton_jacobi_residual(&s, &RealField::zeros(&g), &c, DEFAULT_NODE_EPSILON).is_err());
    }
}
