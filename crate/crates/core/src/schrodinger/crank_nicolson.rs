//! Crank–Nicolson propagation of the one-dimensional Schrödinger equation
//! with Dirichlet ends.
//!
//! Each step solves `(1 + iΔt H / 2ħ) ψⁿ⁺¹ = (1 - iΔt H / 2ħ) ψⁿ` with the
//! 3-point kinetic stencil, which is unitary for real V.

use log::debug;
use num_complex::Complex64;

use super::{PhysicalConstants, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::fields::{ComplexField, FieldStack, Grid};
use crate::tridiag::Thomas;

pub struct CrankNicolson {
    grid: Grid,
    dt: f64,
    lo: usize,
    hi: usize,
    diag: Vec<Complex64>,
    off: Complex64,
    lhs: Thomas<Complex64>,
    pinned: Vec<bool>,
}

impl CrankNicolson {
    pub fn new(grid: &Grid, potential: &PotentialSpec, c: &PhysicalConstants, dt: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(invalid("Crank–Nicolson solver is one-dimensional; use the ADI solver in 2D"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        let h = grid.spacing(0);
        let cfl = h * h * c.mass() / c.hbar();
        if dt > cfl {
            debug!("dt = {dt} exceeds h²m/ħ = {cfl:.3e}; the scheme stays stable but phase accuracy degrades");
        }
        let v = potential.sample(grid)?;
        let pinned = potential.pinned(grid);
        let lo = pinned.iter().position(|&p| !p).ok_or_else(|| invalid("no free cells between the walls"))?;
        let hi = pinned.iter().rposition(|&p| !p).unwrap();
        if pinned[lo..=hi].iter().any(|&p| p) {
            return Err(invalid("pinned cells must form the outer part of the grid"));
        }
        let kin = c.hbar() * c.hbar() / (c.mass() * h * h);
        let r = Complex64::new(0.0, dt / (2.0 * c.hbar()));
        let diag: Vec<Complex64> = (lo..=hi).map(|i| r * (kin + v.values()[i])).collect();
        let off = r * (-0.5 * kin);
        let n = diag.len();
        let one = Complex64::new(1.0, 0.0);
        let lhs_diag: Vec<Complex64> = diag.iter().map(|d| one + d).collect();
        let mut lower = vec![off; n];
        let mut upper = vec![off; n];
        lower[0] = Complex64::new(0.0, 0.0);
        upper[n - 1] = Complex64::new(0.0, 0.0);
        let lhs = Thomas::factor(&lower, &lhs_diag, &upper)?;
        Ok(CrankNicolson { grid: grid.clone(), dt, lo, hi, diag, off, lhs, pinned })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Cells held at zero.
    pub fn pinned(&self) -> &[bool] {
        &self.pinned
    }

    /// Advance `psi` by one step in place.
    pub fn step(&self, psi: &mut [Complex64]) {
        let (lo, hi) = (self.lo, self.hi);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut rhs: Vec<Complex64> = (lo..=hi)
            .map(|i| {
                let left = if i > lo { psi[i - 1] } else { zero };
                let right = if i < hi { psi[i + 1] } else { zero };
                (one - self.diag[i - lo]) * psi[i] - self.off * (left + right)
            })
            .collect();
        self.lhs.solve(&mut rhs);
        for (i, p) in psi.iter_mut().enumerate() {
            *p = if (lo..=hi).contains(&i) { rhs[i - lo] } else { zero };
        }
    }

    /// Evolve `n_steps`, recording every `stride`-th state (ψ0 included).
    pub fn evolve(&self, psi0: &ComplexField, n_steps: usize, stride: usize) -> Result<FieldStack<Complex64>> {
        if psi0.grid() != &self.grid {
            return Err(Error::GridMismatch("initial state grid differs from solver grid".into()));
        }
        psi0.ensure_finite()?;
        let stride = stride.max(1);
        let t0 = psi0.meta.time.unwrap_or(0.0);
        let mut stack = FieldStack::new(self.grid.clone());
        stack.push(t0, psi0.clone().with_label("psi"))?;
        let mut psi = psi0.values().to_vec();
        for step in 1..=n_steps {
            self.step(&mut psi);
            if let Some(bad) = psi.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NumericalAbort { step, reason: format!("non-finite value at cell {bad}") });
            }
            if step % stride == 0 || step == n_steps {
                let t = t0 + step as f64 * self.dt;
                stack.push(t, ComplexField::new(self.grid.clone(), psi.clone())?.with_label("psi"))?;
            }
        }
        Ok(stack)
    }
}

/// Evolve ψ0 under V for `n_steps` steps of `dt`, recording every state.
pub fn crank_nicolson_evolve(
    psi0: &ComplexField,
    potential: &PotentialSpec,
    c: &PhysicalConstants,
    dt: f64,
    n_steps: usize,
) -> Result<FieldStack<Complex64>> {
    CrankNicolson::new(psi0.grid(), potential, c, dt)?.evolve(psi0, n_steps, 1)
}
