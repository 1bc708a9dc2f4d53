//! Heat kernel and a backward-Euler heat-equation solver.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{FieldStack, RealField};
use crate::tridiag::Thomas;

/// Fundamental solution (4πDt)^{-1/2} exp(-x²/4Dt).
pub fn heat_kernel(x: f64, t: f64, d: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("heat kernel needs t > 0, got {t}")));
    }
    if !(d > 0.0) {
        return Err(invalid(format!("heat kernel needs D > 0, got {d}")));
    }
    Ok((4.0 * std::f64::consts::PI * d * t).powf(-0.5) * (-x * x / (4.0 * d * t)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeatBoundary {
    /// End values held at their initial values.
    #[default]
    Dirichlet,
    /// Zero-gradient ends; the trapezoid integral is conserved exactly.
    NoFlux,
}

/// Implicit heat-equation stepper on a 1D grid.
pub struct HeatSolver {
    dt: f64,
    boundary: HeatBoundary,
    lhs: Thomas<f64>,
}

impl HeatSolver {
    pub fn new(points: usize, h: f64, d: f64, dt: f64, boundary: HeatBoundary) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(d > 0.0 && d.is_finite()) {
            return Err(invalid(format!("heat solver needs dt > 0 and D > 0, got dt = {dt}, D = {d}")));
        }
        let r = d * dt / (h * h);
        let mut lower = vec![-r; points];
        let mut diag = vec![1.0 + 2.0 * r; points];
        let mut upper = vec![-r; points];
        lower[0] = 0.0;
        upper[points - 1] = 0.0;
        match boundary {
            HeatBoundary::Dirichlet => {
                diag[0] = 1.0;
                upper[0] = 0.0;
                diag[points - 1] = 1.0;
                lower[points - 1] = 0.0;
            }
            HeatBoundary::NoFlux => {
                upper[0] = -2.0 * r;
                lower[points - 1] = -2.0 * r;
            }
        }
        Ok(HeatSolver { dt, boundary, lhs: Thomas::factor(&lower, &diag, &upper)? })
    }

    pub fn boundary(&self) -> HeatBoundary {
        self.boundary
    }

    pub fn step(&self, q: &mut [f64]) {
        self.lhs.solve(q);
    }
}

/// Evolve `q0` for `n_steps` backward-Euler steps; the stack holds every
/// step, starting from `q0` at its recorded time (0 if none).
pub fn solve_heat(q0: &RealField, d: f64, dt: f64, n_steps: usize, boundary: HeatBoundary) -> Result<FieldStack<f64>> {
    if q0.grid().dim() != 1 {
        return Err(invalid("the heat solver is one-dimensional"));
    }
    q0.ensure_finite()?;
    let solver = HeatSolver::new(q0.len(), q0.grid().spacing(0), d, dt, boundary)?;
    let t0 = q0.meta.time.unwrap_or(0.0);
    let mut stack = FieldStack::new(q0.grid().clone());
    stack.push(t0, q0.clone().with_label("Q"))?;
    let mut q = q0.values().to_vec();
    for step in 1..=n_steps {
        solver.step(&mut q);
        if let Some(i) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalAbort { step, reason: format!("non-finite heat value at cell {i}") });
        }
        stack.push(t0 + step as f64 * solver.dt, RealField::new(q0.grid().clone(), q.clone())?.with_label("Q"))?;
    }
    Ok(stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{laplacian, time_derivative, Grid};
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        assert!((heat_kernel(0.0, 1.0, 1.0).unwrap() - 0.28209479177387814).abs() < 1e-15);
        assert!(heat_kernel(0.0, 0.0, 1.0).is_err());
        assert!(heat_kernel(0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn solver_tracks_kernel() {
        let d = 0.5;
        let g = Grid::new_1d(-10.0, 10.0, 801).unwrap();
        let q0 = RealField::from_fn(&g, |p| heat_kernel(p[0], 1.0, d).unwrap()).with_time(1.0);
        let s = solve_heat(&q0, d, 1e-3, 500, HeatBoundary::Dirichlet).unwrap();
        let last = s.last().unwrap();
        assert!((s.times()[500] - 1.5).abs() < 1e-12);
        let exact = RealField::from_fn(&g, |p| heat_kernel(p[0], 1.5, d).unwrap());
        let err = last.interior_indices(3).map(|i| (last.values()[i] - exact.values()[i]).abs()).fold(0.0, f64::max);
        assert!(err <= 5e-3 * exact.max_magnitude(), "{err}");
        let k = 250;
        let r = laplacian(s.get(k)).unwrap().axpby(1.0, &time_derivative(&s, k).unwrap(), -1.0 / d).unwrap();
        assert!(r.max_magnitude_interior(3) <= 1e-3, "{}", r.max_magnitude_interior(3));
    }

    #[test]
    fn constant_is_fixed_point() {
        let g = Grid::new_1d(0.0, 1.0, 64).unwrap();
        let q0 = RealField::from_fn(&g, |_| 3.0);
        let s = solve_heat(&q0, 1.0, 1e-2, 20, HeatBoundary::NoFlux).unwrap();
        assert!(s.last().unwrap().values().iter().all(|v| (v - 3.0).abs() < 1e-13));
    }

    proptest! {
        #[test]
        fn no_flux_conserves_and_obeys_maximum_principle(
            vals in proptest::collection::vec(-5.0f64..5.0, 16..64),
            dt in 1e-4f64..1e-1,
        ) {
            let g = Grid::new_1d(0.0, 1.0, vals.len()).unwrap();
            let q0 = RealField::new(g, vals.clone()).unwrap();
            let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            for bc in [HeatBoundary::NoFlux, HeatBoundary::Dirichlet] {
                let s = solve_heat(&q0, 0.7, dt, 10, bc).unwrap();
                for f in s.fields() {
                    prop_assert!(f.values().iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
                    if bc == HeatBoundary::NoFlux {
                        prop_assert!((f.integral() - q0.integral()).abs() <= 1e-8 * (1.0 + q0.integral().abs()));
                    }
                }
            }
        }
    }
}
