//! Two semi-infinite media meeting at a plane, driven at one frequency.
//!
//! Left: T₁ = A e^{-σ₁ξ} + B e^{σ₁ξ}; right: T₂ = C e^{-σ₂ξ}; ξ = x - x₀,
//! σⱼ = √(iω/Dⱼ) and flux J = -e dT/dx. Field and flux continuity give
//! B = ΓA with Γ = (e₁σ₁ - e₂σ₂)/(e₁σ₁ + e₂σ₂), C = (1 + Γ)A.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Medium {
    pub diffusivity: f64,
    /// Conductivity-like coupling multiplying the gradient in the flux.
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoMediumInterface {
    pub left: Medium,
    pub right: Medium,
    #[serde(default)]
    pub position: f64,
    pub omega: f64,
    pub incident_flux: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceKind {
    Accumulation,
    Depletion,
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterfaceSolution {
    pub problem: TwoMediumInterface,
    pub gamma: Complex64,
    pub incident_amplitude: Complex64,
    pub interacted_amplitude: Complex64,
    pub transmitted_amplitude: Complex64,
    /// Flux of the interface-interacted wave as it flows (J_i + J_r = J_t).
    pub j_r_continuity: Complex64,
    /// Same flux counted along the incident direction (J_i = J_r + J_t, J_r = ΓJ_i).
    pub j_r_mirror: Complex64,
    pub j_t: Complex64,
    pub field_continuity_residual: f64,
    pub flux_continuity_residual: f64,
    pub kind: InterfaceKind,
}

impl InterfaceSolution {
    pub fn field(&self, x: f64) -> Complex64 {
        let xi = x - self.problem.position;
        if xi <= 0.0 {
            let s = sigma(self.problem.omega, self.problem.left.diffusivity);
            self.incident_amplitude * (-s * xi).exp() + self.interacted_amplitude * (s * xi).exp()
        } else {
            let s = sigma(self.problem.omega, self.problem.right.diffusivity);
            self.transmitted_amplitude * (-s * xi).exp()
        }
    }
}

/// √(iω/D) on the branch with positive real part.
pub fn sigma(omega: f64, d: f64) -> Complex64 {
    Complex64::new(0.0, omega / d).sqrt()
}

/// Interaction coefficient and flux amplitudes. Identical media give Γ = 0.
pub fn solve_interface(problem: &TwoMediumInterface) -> Result<InterfaceSolution> {
    let p = problem;
    for (name, m) in [("left", p.left), ("right", p.right)] {
        if !(m.diffusivity > 0.0 && m.diffusivity.is_finite()) || !(m.coupling > 0.0 && m.coupling.is_finite()) {
            return Err(invalid(format!("{name} medium needs positive finite D and coupling")));
        }
    }
    if !(p.omega > 0.0 && p.omega.is_finite()) {
        return Err(invalid(format!("drive frequency must be positive, got {}", p.omega)));
    }
    if p.incident_flux.norm() == 0.0 || !p.incident_flux.is_finite() {
        return Err(invalid("incident flux must be nonzero and finite"));
    }
    let z1 = p.left.coupling * sigma(p.omega, p.left.diffusivity);
    let z2 = p.right.coupling * sigma(p.omega, p.right.diffusivity);
    let gamma = if p.left == p.right { Complex64::new(0.0, 0.0) } else { (z1 - z2) / (z1 + z2) };
    let a = p.incident_flux / z1;
    let b = gamma * a;
    let c = (Complex64::new(1.0, 0.0) + gamma) * a;
    let j_r = -z1 * b;
    let j_t = z2 * c;
    let scale = a.norm().max(c.norm());
    let field_continuity_residual = (a + b - c).norm() / scale;
    let flux_continuity_residual = (z1 * (a - b) - z2 * c).norm() / p.incident_flux.norm();
    let kind = if gamma.norm() <= 1e-12 {
        InterfaceKind::Transparent
    } else if gamma.re > 0.0 {
        InterfaceKind::Accumulation
    } else {
        InterfaceKind::Depletion
    };
    Ok(InterfaceSolution {
        problem: *p,
        gamma,
        incident_amplitude: a,
        interacted_amplitude: b,
        transmitted_amplitude: c,
        j_r_continuity: j_r,
        j_r_mirror: -j_r,
        j_t,
        field_continuity_residual,
        flux_continuity_residual,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(e1: f64, d1: f64, e2: f64, d2: f64) -> TwoMediumInterface {
        TwoMediumInterface {
            left: Medium { diffusivity: d1, coupling: e1 },
            right: Medium { diffusivity: d2, coupling: e2 },
            position: 0.0,
            omega: 1.0,
            incident_flux: Complex64::new(1.0, 0.0),
        }
    }

    #[test]
    fn identical_media_are_transparent() {
        let s = solve_interface(&problem(1.0, 0.5, 1.0, 0.5)).unwrap();
        assert_eq!(s.gamma, Complex64::new(0.0, 0.0));
        assert_eq!(s.kind, InterfaceKind::Transparent);
        assert!((s.j_t - s.problem.incident_flux).norm() < 1e-15);
    }

    #[test]
    fn effusivity_ratio_three() {
        let s = solve_interface(&problem(1.0, 0.5, 3.0, 0.5)).unwrap();
        assert!((s.gamma - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
        assert_eq!(s.kind, InterfaceKind::Depletion);
        let i = s.problem.incident_flux;
        assert!((i + s.j_r_continuity - s.j_t).norm() < 1e-12);
        assert!((i - s.j_r_mirror - s.j_t).norm() < 1e-12);
        assert!(s.field_continuity_residual < 1e-12 && s.flux_continuity_residual < 1e-12);
        assert!((s.field(-1e-12) - s.field(1e-12)).norm() < 1e-9);
    }

    #[test]
    fn mirror_limit() {
        let s = solve_interface(&problem(1.0, 0.5, 1e12, 0.5)).unwrap();
        assert!((s.gamma.norm() - 1.0).abs() < 1e-9);
        assert!((s.j_r_mirror + s.problem.incident_flux).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_media() {
        assert!(solve_interface(&problem(0.0, 0.5, 1.0, 0.5)).is_err());
        let mut p = problem(1.0, 0.5, 1.0, 0.5);
        p.incident_flux = Complex64::new(0.0, 0.0);
        assert!(solve_interface(&p).is_err());
    }

    proptest! {
        #[test]
        fn passive_swap_and_continuity(e1 in 0.01f64..100.0, e2 in 0.01f64..100.0, d1 in 0.01f64..10.0, d2 in 0.01f64..10.0) {
            let s = solve_interface(&problem(e1, d1, e2, d2)).unwrap();
            prop_assert!(s.gamma.norm() <= 1.0 + 1e-12);
            prop_assert!(s.field_continuity_residual < 1e-10 && s.flux_continuity_residual < 1e-10);
            let w = solve_interface(&problem(e2, d2, e1, d1)).unwrap();
            prop_assert!((w.gamma + s.gamma).norm() < 1e-12);
            if s.gamma.re.abs() > 1e-12 {
                prop_assert!(w.gamma.re.signum() == -s.gamma.re.signum());
            }
        }

        #[test]
        fn converging_media_approach_transparency(e in 0.1f64..10.0, eps in 1e-9f64..1e-3) {
            let s = solve_interface(&problem(e, 1.0, e * (1.0 + eps), 1.0)).unwrap();
            prop_assert!(s.gamma.norm() <= eps);
        }
    }
}
