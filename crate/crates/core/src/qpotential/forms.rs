//! Quantum potential in amplitude, density and velocity forms, plus the
//! comparison used for sign audits.

use super::madelung::{clearance_mask, DensityJet, MadelungDecomposition};
use crate::error::Result;
use crate::fields::{divergence, RealField, DEFAULT_BOUNDARY_MARGIN};
use crate::schrodinger::PhysicalConstants;

/// Cells kept away from masked nodes when comparing forms.
pub const NODE_CLEARANCE: usize = 3;

/// Canonical U = -(ħ²/2m)∇²R/R together with the density form
/// (ħ²/4m)[½|∇P/P|² - ∇²P/P] evaluated on the same jet.
#[derive(Debug, Clone)]
pub struct QuantumPotential {
    pub field: RealField,
    pub p_form: RealField,
    /// max |R-form - P-form| over cells clear of nodes and edges.
    pub max_form_discrepancy: f64,
}

pub fn quantum_potential_from_jet(jet: &DensityJet, c: &PhysicalConstants) -> QuantumPotential {
    let h2m = c.hbar() * c.hbar() / c.mass();
    let n = jet.len();
    let r_form: Vec<f64> = (0..n).map(|i| if jet.mask[i] { 0.0 } else { -0.5 * h2m * jet.lap_r_over_r[i] }).collect();
    let p_form: Vec<f64> = (0..n)
        .map(|i| if jet.mask[i] { 0.0 } else { 0.25 * h2m * (0.5 * jet.log_grad_sq(i) - jet.lap_p[i] / jet.p[i]) })
        .collect();
    let keep = clearance_mask(&jet.grid, &jet.mask, NODE_CLEARANCE, DEFAULT_BOUNDARY_MARGIN);
    let max_form_discrepancy = (0..n).filter(|&i| !keep[i]).map(|i| (r_form[i] - p_form[i]).abs()).fold(0.0, f64::max);
    QuantumPotential { field: jet.field(r_form, "U"), p_form: jet.field(p_form, "U_P"), max_form_discrepancy }
}

/// Canonical quantum potential of a decomposition, by finite differences.
pub fn quantum_potential_canonical(dec: &MadelungDecomposition, c: &PhysicalConstants) -> Result<QuantumPotential> {
    Ok(quantum_potential_from_jet(&DensityJet::from_decomposition(dec)?, c))
}

/// Stochastic velocity u = -(ħ/2m)∇P/P, its osmotic counterpart and the
/// wavenumber form k_u = -∇R/R, with their divergences.
#[derive(Debug, Clone)]
pub struct VelocityFields {
    pub u: Vec<RealField>,
    pub u_osmotic: Vec<RealField>,
    pub k_u: Vec<RealField>,
    pub div_u: RealField,
    pub div_k_u: RealField,
    pub mask: Vec<bool>,
}

impl VelocityFields {
    fn components(jet: &DensityJet, c: &PhysicalConstants) -> (Vec<RealField>, Vec<RealField>, Vec<RealField>) {
        let d = c.diffusivity();
        let n = jet.len();
        let mut u = Vec::new();
        let mut uo = Vec::new();
        let mut k = Vec::new();
        for g in &jet.grad_p {
            let ratio: Vec<f64> = (0..n).map(|i| if jet.mask[i] { 0.0 } else { g[i] / jet.p[i] }).collect();
            u.push(jet.field(ratio.iter().map(|r| -d * r).collect(), "u"));
            uo.push(jet.field(ratio.iter().map(|r| d * r).collect(), "u_osm"));
            k.push(jet.field(ratio.iter().map(|r| -0.5 * r).collect(), "k_u"));
        }
        (u, uo, k)
    }

    /// Divergences by finite differences of the sampled velocity fields.
    pub fn from_jet_fd(jet: &DensityJet, c: &PhysicalConstants) -> Result<Self> {
        let (u, u_osmotic, k_u) = Self::components(jet, c);
        let div_u = divergence(&u)?.with_label("div_u").with_mask(Some(jet.mask.clone()));
        let div_k_u = divergence(&k_u)?.with_label("div_k_u").with_mask(Some(jet.mask.clone()));
        Ok(VelocityFields { u, u_osmotic, k_u, div_u, div_k_u, mask: jet.mask.clone() })
    }

    /// Divergences from the jet via ∇·(∇P/P) = ∇²P/P - |∇P/P|²; exact for analytic jets.
    pub fn from_jet(jet: &DensityJet, c: &PhysicalConstants) -> Self {
        let (u, u_osmotic, k_u) = Self::components(jet, c);
        let n = jet.len();
        let dlog: Vec<f64> =
            (0..n).map(|i| if jet.mask[i] { 0.0 } else { jet.lap_p[i] / jet.p[i] - jet.log_grad_sq(i) }).collect();
        let d = c.diffusivity();
        let div_u = jet.field(dlog.iter().map(|v| -d * v).collect(), "div_u");
        let div_k_u = jet.field(dlog.iter().map(|v| -0.5 * v).collect(), "div_k_u");
        VelocityFields { u, u_osmotic, k_u, div_u, div_k_u, mask: jet.mask.clone() }
    }

    pub fn from_decomposition(dec: &MadelungDecomposition, c: &PhysicalConstants) -> Result<Self> {
        Self::from_jet_fd(&DensityJet::from_decomposition(dec)?, c)
    }
}

/// The two bracketed velocity-form expressions, evaluated as written:
/// Σ[m u·u/2 - (ħ/2)∇·u] and (ħ²/2m)(k_u·k_u - ∇·k_u).
#[derive(Debug, Clone)]
pub struct VelocityForm {
    pub u_form: RealField,
    pub k_form: RealField,
    pub max_form_disagreement: f64,
}

pub fn quantum_potential_velocity_form(v: &VelocityFields, c: &PhysicalConstants) -> VelocityForm {
    let (hbar, m) = (c.hbar(), c.mass());
    let grid = v.div_u.grid().clone();
    let n = grid.len();
    let sq = |f: &[RealField], i: usize| f.iter().map(|c| c.values()[i].powi(2)).sum::<f64>();
    let mut uf = vec![0.0; n];
    let mut kf = vec![0.0; n];
    for i in 0..n {
        if v.mask[i] {
            continue;
        }
        uf[i] = 0.5 * m * sq(&v.u, i) - 0.5 * hbar * v.div_u.values()[i];
        kf[i] = hbar * hbar / (2.0 * m) * (sq(&v.k_u, i) - v.div_k_u.values()[i]);
    }
    let keep = clearance_mask(&grid, &v.mask, NODE_CLEARANCE, DEFAULT_BOUNDARY_MARGIN);
    let max_form_disagreement = (0..n).filter(|&i| !keep[i]).map(|i| (uf[i] - kf[i]).abs()).fold(0.0, f64::max);
    let mk = |vals, label| {
        RealField::new(grid.clone(), vals).expect("grid").with_label(label).with_mask(Some(v.mask.clone()))
    };
    VelocityForm { u_form: mk(uf, "U_u"), k_form: mk(kf, "U_k"), max_form_disagreement }
}

/// Result of comparing a candidate field against a reference: the sign
/// (±1) that best matches, the least-squares ratio, and the residual
/// max|a - sign·b| relative to max|b| over the compared cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignFinding {
    pub sign: f64,
    pub ratio: f64,
    pub max_residual: f64,
    pub scale: f64,
    pub points: usize,
}

impl SignFinding {
    pub fn relative_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_residual / self.scale
        } else {
            self.max_residual
        }
    }
}

/// Compare `a` against `b` on cells where `exclude` is false.
pub fn compare_fields(a: &RealField, b: &RealField, exclude: &[bool]) -> SignFinding {
    let idx: Vec<usize> = (0..a.len()).filter(|&i| !exclude[i]).collect();
    let (mut ab, mut bb) = (0.0, 0.0);
    let mut scale: f64 = 0.0;
    for &i in &idx {
        let (x, y) = (a.values()[i], b.values()[i]);
        ab += x * y;
        bb += y * y;
        scale = scale.max(y.abs());
    }
    let ratio = if bb > 0.0 { ab / bb } else { 0.0 };
    let resid = |s: f64| idx.iter().map(|&i| (a.values()[i] - s * b.values()[i]).abs()).fold(0.0, f64::max);
    let (rp, rn) = (resid(1.0), resid(-1.0));
    let (sign, max_residual) = if rp <= rn { (1.0, rp) } else { (-1.0, rn) };
    SignFinding { sign, ratio, max_residual, scale, points: idx.len() }
}

/// Momentum fluctuation δp = -(ħ/2)∇P/P and its kinetic energy |δp|²/2m.
#[derive(Debug, Clone)]
pub struct MomentumFluctuation {
    pub delta_p: Vec<RealField>,
    pub kinetic: RealField,
}

pub fn momentum_fluctuation_from_jet(jet: &DensityJet, c: &PhysicalConstants) -> MomentumFluctuation {
    let n = jet.len();
    let delta_p: Vec<RealField> = jet
        .grad_p
        .iter()
        .map(|g| {
            jet.field((0..n).map(|i| if jet.mask[i] { 0.0 } else { -0.5 * c.hbar() * g[i] / jet.p[i] }).collect(), "dp")
        })
        .collect();
    let kinetic =
        (0..n).map(|i| delta_p.iter().map(|d| d.values()[i].powi(2)).sum::<f64>() / (2.0 * c.mass())).collect();
    MomentumFluctuation { kinetic: jet.field(kinetic, "dE_kin"), delta_p }
}

pub fn momentum_fluctuation(dec: &MadelungDecomposition, c: &PhysicalConstants) -> Result<MomentumFluctuation> {
    Ok(momentum_fluctuation_from_jet(&DensityJet::from_decomposition(dec)?, c))
}
