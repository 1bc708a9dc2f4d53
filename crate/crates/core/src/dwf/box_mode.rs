//! Separable heat-field mode of an infinite box and its associated checks.

use num_complex::Complex64;
use serde::Serialize;

use super::DwfParameters;
use crate::error::{invalid, Result};
use crate::fields::{laplacian, ComplexField, FieldStack, Grid, RealField};
use crate::qpotential::{decompose, quantum_potential_canonical, DEFAULT_NODE_EPSILON};
use crate::schrodinger::PhysicalConstants;

/// Mode n of a box [0, L]: Q̃(x,t) = N sin(kₙx) e^{iωₙt} with N = √(2/L),
/// kₙ = nπ/L and ωₙ = D kₙ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxModeSolution {
    pub length: f64,
    pub n: u32,
    pub k_n: f64,
    pub omega_n: f64,
    pub norm: f64,
    /// Dimension-carrying amplitude of the spatial factor; 1 in natural units.
    pub c_q: f64,
    pub diffusivity: f64,
}

pub fn box_mode(length: f64, n: u32, c: &PhysicalConstants) -> Result<BoxModeSolution> {
    if n == 0 {
        return Err(invalid("box mode index must be ≥ 1"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid(format!("box length must be positive, got {length}")));
    }
    let k_n = n as f64 * std::f64::consts::PI / length;
    let d = c.diffusivity();
    Ok(BoxModeSolution {
        length,
        n,
        k_n,
        omega_n: d * k_n * k_n,
        norm: (2.0 / length).sqrt(),
        c_q: 1.0,
        diffusivity: d,
    })
}

impl BoxModeSolution {
    /// Same mode with a different drive frequency (for dispersion diagnostics).
    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega_n = omega;
        self
    }

    /// Normalized eigenfunction eₙ(x) = N sin(kₙx).
    pub fn eigenfunction(&self, x: f64) -> f64 {
        self.norm * (self.k_n * x).sin()
    }

    /// Spatial factor X(x) = N C_Q sin(kₙx).
    pub fn spatial(&self, x: f64) -> f64 {
        self.c_q * self.eigenfunction(x)
    }

    pub fn q_tilde(&self, x: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.omega_n * t) * self.eigenfunction(x)
    }

    /// Source q(x) = -kₙ²(1+i) N C_Q sin(kₙx).
    pub fn source(&self, x: f64) -> Complex64 {
        Complex64::new(-self.k_n * self.k_n, -self.k_n * self.k_n) * self.spatial(x)
    }

    /// Closed-form quantum potential ħ²kₙ²/2m.
    pub fn energy(&self, c: &PhysicalConstants) -> f64 {
        c.hbar() * c.hbar() * self.k_n * self.k_n / (2.0 * c.mass())
    }

    /// Node positions jL/n, walls included.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| j as f64 * self.length / self.n as f64).collect()
    }

    pub fn grid(&self, points: usize) -> Result<Grid> {
        Grid::new_1d(0.0, self.length, points)
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> ComplexField {
        ComplexField::from_fn(grid, |p| self.q_tilde(p[0], t)).with_label("Q_tilde").with_time(t)
    }

    /// Cells closer than `cells` grid spacings to a node or wall.
    pub fn near_nodes(&self, grid: &Grid, cells: usize) -> Vec<bool> {
        let h = grid.spacing(0);
        let nodes = self.nodes();
        (0..grid.len()).map(|i| nodes.iter().any(|&x| (grid.point(i)[0] - x).abs() < cells as f64 * h)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivatives {
    Analytic,
    FiniteDifference,
}

/// ∇²Q̃ - (1/D)∂ₜQ̃ + (1+i)kₙ²Q̃ on `grid` at time `t`. With finite
/// differences, ∂ₜ uses a centred difference over `±dt_probe`.
pub fn box_eigen_residual(sol: &BoxModeSolution, grid: &Grid, t: f64, mode: Derivatives) -> Result<ComplexField> {
    let alpha = Complex64::new(sol.k_n * sol.k_n, sol.k_n * sol.k_n);
    let q = sol.sample(grid, t);
    let out = match mode {
        Derivatives::Analytic => q.map(|z| {
            let lap = -sol.k_n * sol.k_n * z;
            let dt = Complex64::new(0.0, sol.omega_n) * z;
            lap - dt / sol.diffusivity + alpha * z
        }),
        Derivatives::FiniteDifference => {
            let probe = 1e-4 / sol.omega_n.max(1.0);
            let mut s = FieldStack::new(grid.clone());
            for tt in [t - probe, t, t + probe] {
                s.push(tt, sol.sample(grid, tt))?;
            }
            let dt = crate::fields::time_derivative(&s, 1)?;
            let lap = laplacian(&q)?;
            let mut vals = Vec::with_capacity(q.len());
            for i in 0..q.len() {
                vals.push(lap.values()[i] - dt.values()[i] / sol.diffusivity + alpha * q.values()[i]);
            }
            ComplexField::new(grid.clone(), vals)?
        }
    };
    Ok(out.with_label("eigen_residual").with_time(t))
}

#[derive(Debug, Clone)]
pub struct BoxPotential {
    pub closed_form: f64,
    pub numeric: RealField,
    /// Largest relative deviation of the numeric field from the closed form
    /// at cells at least `clearance` cells from nodes and walls.
    pub max_relative_error: f64,
    pub clearance: usize,
}

/// Closed-form ħ²kₙ²/2m next to the canonical U evaluated on P = |Q̃|².
pub fn box_quantum_potential(
    sol: &BoxModeSolution,
    points: usize,
    clearance: usize,
    c: &PhysicalConstants,
) -> Result<BoxPotential> {
    let grid = sol.grid(points)?;
    let psi = sol.sample(&grid, 0.0);
    let dec = decompose(&psi, c.hbar(), DEFAULT_NODE_EPSILON)?;
    let numeric = quantum_potential_canonical(&dec, c)?.field;
    let closed_form = sol.energy(c);
    let skip = sol.near_nodes(&grid, clearance);
    let max_relative_error = (0..grid.len())
        .filter(|&i| !skip[i] && !dec.node_mask[i])
        .map(|i| (numeric.values()[i] - closed_form).abs() / closed_form)
        .fold(0.0, f64::max);
    Ok(BoxPotential { closed_form, numeric, max_relative_error, clearance })
}

/// ∇²Q̃ - κ²Q̃ - source for single-frequency fields, with ∇²Q̃ supplied.
pub fn helmholtz_residual_with_laplacian(
    lap: &ComplexField,
    q: &ComplexField,
    source: &ComplexField,
    params: &DwfParameters,
) -> Result<ComplexField> {
    q.grid().check_same(lap.grid())?;
    q.grid().check_same(source.grid())?;
    let k2 = params.kappa_sq();
    let vals = (0..q.len()).map(|i| lap.values()[i] - k2 * q.values()[i] - source.values()[i]).collect();
    Ok(ComplexField::new(q.grid().clone(), vals)?.with_label("helmholtz_residual"))
}

/// Helmholtz-type residual with a finite-difference Laplacian.
pub fn helmholtz_pseudo_residual(
    q: &ComplexField,
    source: &ComplexField,
    params: &DwfParameters,
) -> Result<ComplexField> {
    q.grid().check_same(source.grid())?;
    helmholtz_residual_with_laplacian(&laplacian(q)?, q, source, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwf::dwf_parameters;
    use std::f64::consts::PI;

    fn unit() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn mode_parameters() {
        let s = box_mode(1.0, 1, &unit()).unwrap();
        assert!((s.norm - 2f64.sqrt()).abs() < 1e-15 && (s.k_n - PI).abs() < 1e-15);
        let s = box_mode(2.0, 3, &unit()).unwrap();
        assert!((s.k_n - 1.5 * PI).abs() < 1e-15 && (s.norm - 1.0).abs() < 1e-15);
        assert!(box_mode(1.0, 0, &unit()).is_err());
        assert!(box_mode(-1.0, 1, &unit()).is_err());
    }

    #[test]
    fn orthonormal_and_dirichlet() {
        let c = unit();
        let (a, b) = (box_mode(1.0, 1, &c).unwrap(), box_mode(1.0, 2, &c).unwrap());
        let g = a.grid(2048).unwrap();
        let ea = RealField::from_fn(&g, |p| a.eigenfunction(p[0]));
        let eb = RealField::from_fn(&g, |p| b.eigenfunction(p[0]));
        assert!(ea.zip_with(&eb, |x, y| x * y).unwrap().integral().abs() < 1e-10);
        assert!((ea.zip_with(&ea, |x, y| x * y).unwrap().integral() - 1.0).abs() < 1e-8);
        assert!(a.q_tilde(0.0, 0.3).norm() < 1e-15 && a.q_tilde(1.0, 0.3).norm() < 1e-15);
        let lap = laplacian(&ea).unwrap();
        for i in ea.interior_indices(3) {
            assert!((lap.values()[i] + PI * PI * ea.values()[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn eigen_residual_vanishes_iff_dispersion_holds() {
        let c = unit();
        let s = box_mode(1.0, 1, &c).unwrap();
        assert!((s.omega_n - PI * PI / 2.0).abs() < 1e-14);
        let g = s.grid(2048).unwrap();
        let qmax = s.sample(&g, 0.4).max_magnitude();
        let r = box_eigen_residual(&s, &g, 0.4, Derivatives::Analytic).unwrap();
        assert!(r.max_magnitude() <= 1e-12 * qmax);
        let r = box_eigen_residual(&s, &g, 0.4, Derivatives::FiniteDifference).unwrap();
        assert!(r.max_magnitude_interior(1) <= 1e-3 * qmax, "{}", r.max_magnitude_interior(1));

        let off = s.with_omega(2.0 * s.diffusivity * s.k_n * s.k_n);
        let r = box_eigen_residual(&off, &g, 0.4, Derivatives::Analytic).unwrap();
        let q = off.sample(&g, 0.4);
        for i in 0..g.len() {
            let expect = Complex64::new(0.0, -s.k_n * s.k_n) * q.values()[i];
            assert!((r.values()[i] - expect).norm() < 1e-12);
        }
        assert!(r.max_magnitude() > 1.0);
    }

    #[test]
    fn box_potential_closed_form() {
        let c = unit();
        for (n, e) in [(1, 4.934802200544679), (2, 19.739208802178716)] {
            let s = box_mode(1.0, n, &c).unwrap();
            assert!((s.energy(&c) - e).abs() < 1e-12);
            let b = box_quantum_potential(&s, 2048, 5, &c).unwrap();
            assert!(b.max_relative_error <= 1e-3, "n={n}: {}", b.max_relative_error);
        }
    }

    #[test]
    fn helmholtz_cases() {
        let c = unit();
        let s = box_mode(1.0, 2, &c).unwrap();
        let p = dwf_parameters(s.omega_n, s.diffusivity).unwrap();
        let g = s.grid(2048).unwrap();
        let q = s.sample(&g, 0.0);
        let src = ComplexField::from_fn(&g, |x| s.source(x[0]));
        let r = helmholtz_pseudo_residual(&q, &src, &p).unwrap();
        assert!(r.max_magnitude_interior(1) <= 1e-3 * q.max_magnitude());
        let lap = q.scaled(-s.k_n * s.k_n);
        let r = helmholtz_residual_with_laplacian(&lap, &q, &src, &p).unwrap();
        assert!(r.max_magnitude() <= 1e-12 * q.max_magnitude());

        let zero = ComplexField::zeros(&g);
        assert_eq!(helmholtz_pseudo_residual(&zero, &zero, &p).unwrap().max_magnitude(), 0.0);

        let p = dwf_parameters(2.0, 1.0).unwrap();
        let decay = ComplexField::from_fn(&g, |x| (-p.kappa * x[0]).exp());
        let lap = decay.map(|z| p.kappa_sq() * z);
        assert!(helmholtz_residual_with_laplacian(&lap, &decay, &zero, &p).unwrap().max_magnitude() < 1e-14);
        let other = Grid::new_1d(0.0, 2.0, 2048).unwrap();
        assert!(helmholtz_pseudo_residual(&decay, &ComplexField::zeros(&other), &p).is_err());
    }
}
