//! Closed-form free Gaussian wave packets.
//!
//! Convention: `sigma` is the standard deviation of |ψ|² at t = 0, so
//! ψ(x, 0) ∝ exp(-(x - x0)² / 4σ²) e^{i k0 (x - x0)} and the width grows as
//! σ(t) = σ sqrt(1 + (ħt / 2mσ²)²).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PhysicalConstants;
use crate::error::{invalid, Result};
use crate::fields::{ComplexField, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacketSpec {
    pub center: f64,
    pub sigma: f64,
    #[serde(default)]
    pub wavenumber: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default)]
    pub phase: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl WavePacketSpec {
    pub fn new(center: f64, sigma: f64, wavenumber: f64) -> Self {
        WavePacketSpec { center, sigma, wavenumber, weight: 1.0, phase: 0.0 }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("packet sigma must be positive, got {}", self.sigma)));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(invalid(format!("packet weight must be ≥ 0, got {}", self.weight)));
        }
        if !(self.center.is_finite() && self.wavenumber.is_finite() && self.phase.is_finite()) {
            return Err(invalid("packet parameters must be finite"));
        }
        Ok(())
    }

    /// Group velocity ħk0/m.
    pub fn velocity(&self, c: &PhysicalConstants) -> f64 {
        c.hbar() * self.wavenumber / c.mass()
    }

    /// Centroid of |ψ|² under free evolution.
    pub fn centroid(&self, c: &PhysicalConstants, t: f64) -> f64 {
        self.center + self.velocity(c) * t
    }

    /// Standard deviation of |ψ|² under free evolution.
    pub fn width(&self, c: &PhysicalConstants, t: f64) -> f64 {
        let tau = self.spreading(c, t);
        self.sigma * (1.0 + tau * tau).sqrt()
    }

    fn spreading(&self, c: &PhysicalConstants, t: f64) -> f64 {
        c.hbar() * t / (2.0 * c.mass() * self.sigma * self.sigma)
    }

    /// Unit-norm free-packet amplitude at (x, t), excluding weight and phase.
    pub fn amplitude(&self, c: &PhysicalConstants, t: f64, x: f64) -> Complex64 {
        let tau = self.spreading(c, t);
        let s = Complex64::new(1.0, tau);
        let xi = x - self.centroid(c, t);
        let prefactor = (2.0 * std::f64::consts::PI * self.sigma * self.sigma).powf(-0.25) / s.sqrt();
        let envelope = -xi * xi / (4.0 * self.sigma * self.sigma * s);
        let phase =
            self.wavenumber * (x - self.center) - c.hbar() * self.wavenumber * self.wavenumber * t / (2.0 * c.mass());
        prefactor * (envelope + Complex64::new(0.0, phase)).exp()
    }
}

/// A sampled packet plus a flag raised when the grid cannot hold ±6σ(t)
/// around the centroid (the grid norm is then truncated before renormalizing).
#[derive(Debug, Clone)]
pub struct PacketState {
    pub psi: ComplexField,
    pub truncated: bool,
}

fn fits(spec: &WavePacketSpec, c: &PhysicalConstants, t: f64, grid: &Grid) -> bool {
    let (mu, s) = (spec.centroid(c, t), spec.width(c, t));
    let a = grid.axis(0);
    mu - 6.0 * s >= a.min && mu + 6.0 * s <= a.max
}

/// Free Gaussian packet at time `t`, normalized on the grid.
pub fn gaussian_packet(spec: &WavePacketSpec, c: &PhysicalConstants, t: f64, grid: &Grid) -> Result<PacketState> {
    spec.validate()?;
    if grid.dim() != 1 {
        return Err(invalid("gaussian_packet samples one-dimensional grids"));
    }
    let rot = Complex64::from_polar(1.0, spec.phase);
    let raw = ComplexField::from_fn(grid, |p| rot * spec.amplitude(c, t, p[0]));
    let psi = raw.normalized()?.with_label("psi").with_time(t);
    Ok(PacketState { psi, truncated: !fits(spec, c, t, grid) })
}

/// Normalized superposition Σ wᵢ e^{iφᵢ} ψᵢ(x, tᵢ) of free packets.
pub fn superpose(packets: &[(WavePacketSpec, f64)], c: &PhysicalConstants, grid: &Grid) -> Result<ComplexField> {
    if packets.is_empty() {
        return Err(invalid("superposition needs at least one packet"));
    }
    for (p, _) in packets {
        p.validate()?;
    }
    if packets.iter().all(|(p, _)| p.weight == 0.0) {
        return Err(invalid("all packet weights are zero"));
    }
    if grid.dim() != 1 {
        return Err(invalid("superpose samples one-dimensional grids"));
    }
    let coeffs: Vec<Complex64> = packets.iter().map(|(p, _)| Complex64::from_polar(p.weight, p.phase)).collect();
    let raw = ComplexField::from_fn(grid, |pt| {
        packets.iter().zip(&coeffs).map(|((p, t), w)| w * p.amplitude(c, *t, pt[0])).sum()
    });
    let t0 = packets[0].1;
    Ok(raw.normalized()?.with_label("psi").with_time(t0))
}
