use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// ħ, particle mass and the per-particle angular frequency ω. The
/// diffusivity `D = ħ/2m` and diffusion length `L(ω) = sqrt(2D/ω)` are
/// derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants", into = "RawConstants")]
pub struct PhysicalConstants {
    hbar: f64,
    mass: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default = "one")]
    omega: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawConstants> for PhysicalConstants {
    type Error = crate::Error;
    fn try_from(r: RawConstants) -> Result<Self> {
        PhysicalConstants::new(r.hbar, r.mass, r.omega)
    }
}

impl From<PhysicalConstants> for RawConstants {
    fn from(c: PhysicalConstants) -> Self {
        RawConstants { hbar: c.hbar, mass: c.mass, omega: c.omega }
    }
}

impl Default for PhysicalConstants {
    /// Natural units ħ = m = ω = 1.
    fn default() -> Self {
        PhysicalConstants { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("omega", omega)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(PhysicalConstants { hbar, mass, omega })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        PhysicalConstants::new(self.hbar, self.mass, omega)
    }

    /// D = ħ / 2m.
    pub fn diffusivity(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }

    /// L(ω) = sqrt(2D/ω).
    pub fn diffusion_length(&self) -> f64 {
        (2.0 * self.diffusivity() / self.omega).sqrt()
    }

    /// ħω, the thermal energy scale kT.
    pub fn thermal_energy(&self) -> f64 {
        self.hbar * self.omega
    }
}
