//! Heat field Q̂ = ln(P/P_ref) and the thermodynamic renderings of U.

use serde::{Deserialize, Serialize};

use super::madelung::{node_mask, DensityJet};
use crate::error::{invalid, Result};
use crate::fields::{gradient, laplacian, time_derivative, FieldStack, RealField};
use crate::schrodinger::PhysicalConstants;

/// Orientation of the dimensional heat field: forward Q = -ħωQ̂, osmotic Q = +ħωQ̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HeatDirection {
    #[default]
    Forward,
    Osmotic,
}

impl HeatDirection {
    pub fn orientation(self) -> f64 {
        match self {
            HeatDirection::Forward => -1.0,
            HeatDirection::Osmotic => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeatDirection::Forward => "forward",
            HeatDirection::Osmotic => "osmotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeatReference {
    /// Pointwise reference density, typically P(x, 0).
    Field(RealField),
    Scalar(f64),
}

impl HeatReference {
    /// Scalar reference max P.
    pub fn max_of(p: &RealField) -> Self {
        HeatReference::Scalar(p.values().iter().cloned().fold(0.0, f64::max))
    }
}

/// Dimensionless log-density with its spatial derivatives.
#[derive(Debug, Clone)]
pub struct HeatField {
    pub qhat: RealField,
    pub grad_qhat: Vec<RealField>,
    pub lap_qhat: RealField,
    pub direction: HeatDirection,
    pub hbar: f64,
    pub omega: f64,
    pub reference: HeatReference,
}

fn masked(field: RealField, mask: &[bool]) -> RealField {
    let mut f = field.with_mask(Some(mask.to_vec()));
    for (v, &m) in f.values_mut().iter_mut().zip(mask) {
        if m {
            *v = 0.0;
        }
    }
    f
}

impl HeatField {
    fn from_qhat(
        qhat: RealField,
        mask: &[bool],
        direction: HeatDirection,
        c: &PhysicalConstants,
        reference: HeatReference,
    ) -> Result<Self> {
        let grad_qhat = gradient(&qhat)?.into_iter().map(|g| masked(g, mask)).collect();
        let lap_qhat = masked(laplacian(&qhat)?, mask);
        Ok(HeatField { qhat, grad_qhat, lap_qhat, direction, hbar: c.hbar(), omega: c.omega(), reference })
    }

    /// Q̂ from a sampled density with finite-difference derivatives. Cells
    /// where P or P_ref fall below `eps_node` of their maxima are masked.
    pub fn from_density(
        p: &RealField,
        reference: HeatReference,
        direction: HeatDirection,
        c: &PhysicalConstants,
        eps_node: f64,
    ) -> Result<Self> {
        p.ensure_finite()?;
        let mut mask = node_mask(p, eps_node);
        let refs: Vec<f64> = match &reference {
            HeatReference::Field(r) => {
                p.grid().check_same(r.grid())?;
                for (m, rm) in mask.iter_mut().zip(node_mask(r, eps_node)) {
                    *m |= rm;
                }
                r.values().to_vec()
            }
            HeatReference::Scalar(s) => {
                if !(*s > 0.0 && s.is_finite()) {
                    return Err(invalid(format!("scalar reference density must be positive, got {s}")));
                }
                vec![*s; p.len()]
            }
        };
        let vals = (0..p.len()).map(|i| if mask[i] { 0.0 } else { (p.values()[i] / refs[i]).ln() }).collect();
        let mut qhat = RealField::new(p.grid().clone(), vals)?.with_label("Qhat").with_mask(Some(mask.clone()));
        qhat.meta.time = p.meta.time;
        Self::from_qhat(qhat, &mask, direction, c, reference)
    }

    /// Q̂ = ln(P/max P) with derivatives taken from an analytic jet.
    pub fn from_jet(jet: &DensityJet, direction: HeatDirection, c: &PhysicalConstants) -> Self {
        let n = jet.len();
        let pmax = jet.p.iter().cloned().fold(0.0, f64::max);
        let qhat = jet.field((0..n).map(|i| if jet.mask[i] { 0.0 } else { (jet.p[i] / pmax).ln() }).collect(), "Qhat");
        let grad_qhat = jet
            .grad_p
            .iter()
            .map(|g| jet.field((0..n).map(|i| if jet.mask[i] { 0.0 } else { g[i] / jet.p[i] }).collect(), "grad_Qhat"))
            .collect();
        let lap_qhat = jet.field(
            (0..n).map(|i| if jet.mask[i] { 0.0 } else { jet.lap_p[i] / jet.p[i] - jet.log_grad_sq(i) }).collect(),
            "lap_Qhat",
        );
        HeatField {
            qhat,
            grad_qhat,
            lap_qhat,
            direction,
            hbar: c.hbar(),
            omega: c.omega(),
            reference: HeatReference::Scalar(pmax),
        }
    }

    /// Wrap a dimensional heat field Q given directly.
    pub fn from_heat(q: &RealField, direction: HeatDirection, c: &PhysicalConstants) -> Result<Self> {
        q.ensure_finite()?;
        let s = direction.orientation() / c.thermal_energy();
        let mask = q.mask().map(<[bool]>::to_vec).unwrap_or_else(|| vec![false; q.len()]);
        let qhat = q.scaled(s).with_label("Qhat");
        Self::from_qhat(qhat, &mask, direction, c, HeatReference::Scalar(1.0))
    }

    fn thermal_energy(&self) -> f64 {
        self.hbar * self.omega
    }

    pub fn mask(&self) -> Vec<bool> {
        self.qhat.mask().map(<[bool]>::to_vec).unwrap_or_else(|| vec![false; self.qhat.len()])
    }

    /// Dimensional heat field ∓ħωQ̂.
    pub fn q(&self) -> RealField {
        self.qhat.scaled(self.direction.orientation() * self.thermal_energy()).with_label("Q")
    }

    /// ∇Q/ħω per axis.
    pub fn grad_q_over_thermal(&self) -> Vec<RealField> {
        self.grad_qhat.iter().map(|g| g.scaled(self.direction.orientation())).collect()
    }

    fn grad_sq(&self, i: usize) -> f64 {
        self.grad_qhat.iter().map(|g| g.values()[i].powi(2)).sum()
    }
}

/// U = (ħ²/4m)[½(∇Q/ħω)² - ∇²Q/ħω] for the field's orientation.
pub fn quantum_potential_thermo(h: &HeatField, c: &PhysicalConstants) -> RealField {
    let pre = c.hbar() * c.hbar() / (4.0 * c.mass());
    let o = h.direction.orientation();
    let mask = h.mask();
    let vals = (0..h.qhat.len())
        .map(|i| if mask[i] { 0.0 } else { pre * (0.5 * h.grad_sq(i) - o * h.lap_qhat.values()[i]) })
        .collect();
    RealField::new(h.qhat.grid().clone(), vals).expect("grid").with_label("U_thermo").with_mask(Some(mask))
}

/// Time-averaged rendering Ū = -(ħ²/2m)∇²Q/ħω of a dimensional heat field.
pub fn quantum_potential_thermalized(q: &RealField, c: &PhysicalConstants) -> Result<RealField> {
    q.ensure_finite()?;
    let s = -c.hbar() * c.hbar() / (2.0 * c.mass() * c.thermal_energy());
    Ok(laplacian(q)?.scaled(s).with_label("U_bar"))
}

/// Thermalized rendering with the exchanged energy identified with the local
/// heat, ħω → Q(x): Ū = -(ħ²/2m)∇²Q/Q. Cells with |Q| < eps·max|Q| are masked.
pub fn quantum_potential_thermalized_local(q: &RealField, c: &PhysicalConstants, eps: f64) -> Result<RealField> {
    q.ensure_finite()?;
    let lap = laplacian(q)?;
    let qmax = q.max_magnitude();
    let mask: Vec<bool> = q.values().iter().map(|v| v.abs() < eps * qmax).collect();
    let s = -c.hbar() * c.hbar() / (2.0 * c.mass());
    let vals = (0..q.len()).map(|i| if mask[i] { 0.0 } else { s * lap.values()[i] / q.values()[i] }).collect();
    Ok(RealField::new(q.grid().clone(), vals)?.with_label("U_bar").with_mask(Some(mask)))
}

/// Ratio of the diffusion-length rendering -(L/2)²∇²Q to the thermalized
/// Ū = -(ħ²/2m)∇²Q/ħω, with L² = 2D/ω and D = ħ/2m. Analytically 1/2; the
/// measurement is made on the supplied Laplacian values.
pub fn diffusion_length_ratio(lap_q: &[f64], c: &PhysicalConstants) -> Option<f64> {
    let l = c.diffusion_length();
    let (mut num, mut den) = (0.0, 0.0);
    for &v in lap_q {
        let a = -(0.5 * l).powi(2) * v;
        let b = -c.hbar() * c.hbar() / (2.0 * c.mass()) * v / c.thermal_energy();
        num += a * b;
        den += b * b;
    }
    (den > 0.0).then(|| num / den)
}

/// ∇²Q - (1/2ħω)|∇Q|², which vanishes exactly where the thermodynamic U does.
pub fn vanishing_u_residual(h: &HeatField) -> RealField {
    let e = h.thermal_energy();
    let o = h.direction.orientation();
    let mask = h.mask();
    let vals = (0..h.qhat.len())
        .map(|i| if mask[i] { 0.0 } else { e * (o * h.lap_qhat.values()[i] - 0.5 * h.grad_sq(i)) })
        .collect();
    RealField::new(h.qhat.grid().clone(), vals).expect("grid").with_label("vanishing_U").with_mask(Some(mask))
}

/// Heat-equation residual ∇²Q - (1/D)∂Q/∂t per frame, and the matching
/// rendering -(ħ/4ωm)·residual of U.
#[derive(Debug, Clone)]
pub struct HeatEquationResidual {
    pub residual: FieldStack<f64>,
    pub u_rendering: FieldStack<f64>,
}

pub fn heat_equation_residual(q: &FieldStack<f64>, c: &PhysicalConstants) -> Result<HeatEquationResidual> {
    if q.len() < 3 {
        return Err(invalid(format!("heat-equation residual needs ≥ 3 time samples, got {}", q.len())));
    }
    for f in q.fields() {
        q.grid().check_same(f.grid())?;
    }
    let d = c.diffusivity();
    let scale = -c.hbar() / (4.0 * c.omega() * c.mass());
    let mut residual = FieldStack::new(q.grid().clone());
    let mut u = FieldStack::new(q.grid().clone());
    for (k, &t) in q.times().iter().enumerate() {
        let lap = laplacian(q.get(k))?;
        let dt = time_derivative(q, k)?;
        let r = lap.axpby(1.0, &dt, -1.0 / d)?.with_label("heat_residual");
        u.push(t, r.scaled(scale).with_label("U_heat"))?;
        residual.push(t, r)?;
    }
    Ok(HeatEquationResidual { residual, u_rendering: u })
}

/// Heat stack Q(x, t) from a density stack with the given orientation and
/// reference (defaults to the first frame, pointwise).
pub fn heat_stack(
    p: &FieldStack<f64>,
    reference: Option<HeatReference>,
    direction: HeatDirection,
    c: &PhysicalConstants,
    eps_node: f64,
) -> Result<FieldStack<f64>> {
    let first = p.fields().first().ok_or_else(|| invalid("empty density stack"))?;
    let reference = reference.unwrap_or_else(|| HeatReference::Field(first.clone()));
    let mut out = FieldStack::new(p.grid().clone());
    for (t, f) in p.times().iter().zip(p.fields()) {
        let h = HeatField::from_density(f, reference.clone(), direction, c, eps_node)?;
        out.push(*t, h.q())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::qpotential::{
        box_density_jet, clearance_mask, compare_fields, gaussian_density_jet, quantum_potential_from_jet,
        DEFAULT_NODE_EPSILON,
    };
    use std::f64::consts::PI;

    fn unit() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn kernel(x: f64, t: f64, d: f64) -> f64 {
        (4.0 * PI * d * t).powf(-0.5) * (-x * x / (4.0 * d * t)).exp()
    }

    #[test]
    fn uniform_density_has_no_thermo_potential() {
        let g = Grid::new_1d(0.0, 1.0, 64).unwrap();
        let p = RealField::from_fn(&g, |_| 1.0);
        for dir in [HeatDirection::Forward, HeatDirection::Osmotic] {
            let h =
                HeatField::from_density(&p, HeatReference::Scalar(1.0), dir, &unit(), DEFAULT_NODE_EPSILON).unwrap();
            assert!(quantum_potential_thermo(&h, &unit()).max_magnitude() < 1e-12);
            assert!(vanishing_u_residual(&h).max_magnitude() < 1e-12);
        }
    }

    #[test]
    fn forward_gradient_is_minus_log_gradient() {
        let g = Grid::new_1d(-5.0, 5.0, 501).unwrap();
        let jet = gaussian_density_jet(&g, 0.0, 1.0, DEFAULT_NODE_EPSILON);
        let h = HeatField::from_jet(&jet, HeatDirection::Forward, &unit());
        let gq = &h.grad_q_over_thermal()[0];
        for i in 0..g.len() {
            assert!((gq.values()[i] + jet.grad_p[0][i] / jet.p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn thermo_orientations_against_canonical() {
        let g = Grid::new_1d(0.0, 1.0, 2048).unwrap();
        let c = unit();
        let jet = box_density_jet(&g, 1.0, 1, DEFAULT_NODE_EPSILON);
        let canon = quantum_potential_from_jet(&jet, &c).field;
        let ex = clearance_mask(&g, &jet.mask, 5, 5);
        let fwd = quantum_potential_thermo(&HeatField::from_jet(&jet, HeatDirection::Forward, &c), &c);
        let s = compare_fields(&fwd, &canon, &ex);
        assert_eq!(s.sign, -1.0);
        assert!(s.relative_residual() < 1e-10, "{s:?}");
        // osmotic orientation gives (ħ²/4m)[(3/2)(∇P/P)² - ∇²P/P], not +U
        let osm = quantum_potential_thermo(&HeatField::from_jet(&jet, HeatDirection::Osmotic, &c), &c);
        let s = compare_fields(&osm, &canon, &ex);
        assert!(s.relative_residual() > 1e-3, "{s:?}");
        for i in (0..g.len()).filter(|&i| !ex[i]) {
            let gg = jet.log_grad_sq(i);
            let expect = 0.25 * (1.5 * gg - jet.lap_p[i] / jet.p[i]);
            assert!((osm.values()[i] - expect).abs() < 1e-9 * (1.0 + gg));
        }
    }

    #[test]
    fn fd_forward_thermo_matches_negative_canonical() {
        let g = Grid::new_1d(0.0, 1.0, 2048).unwrap();
        let c = unit();
        let p = RealField::from_fn(&g, |x| 2.0 * (PI * x[0]).sin().powi(2));
        let h =
            HeatField::from_density(&p, HeatReference::max_of(&p), HeatDirection::Forward, &c, DEFAULT_NODE_EPSILON)
                .unwrap();
        let u = quantum_potential_thermo(&h, &c);
        let ex = clearance_mask(&g, h.qhat.mask().unwrap(), 200, 200);
        for i in (0..g.len()).filter(|&i| !ex[i]) {
            assert!((u.values()[i] + PI * PI / 2.0).abs() < 5e-3, "{i} {}", u.values()[i]);
        }
    }

    #[test]
    fn vanishing_residual_scaled_is_negative_thermo() {
        let g = Grid::new_1d(0.0, 1.0, 1024).unwrap();
        let c = PhysicalConstants::new(1.0, 1.0, 2.0).unwrap();
        let jet = box_density_jet(&g, 1.0, 1, DEFAULT_NODE_EPSILON);
        for dir in [HeatDirection::Forward, HeatDirection::Osmotic] {
            let h = HeatField::from_jet(&jet, dir, &c);
            let r = vanishing_u_residual(&h);
            let u = quantum_potential_thermo(&h, &c);
            let scale = c.hbar() * c.hbar() / (4.0 * c.mass() * c.thermal_energy());
            for i in 0..g.len() {
                assert!((scale * r.values()[i] + u.values()[i]).abs() <= 1e-9 * (1.0 + u.values()[i].abs()));
            }
        }
    }

    #[test]
    fn linear_heat_cases() {
        let g = Grid::new_1d(-1.0, 1.0, 101).unwrap();
        let c = unit();
        let q = RealField::from_fn(&g, |p| 0.7 * p[0]);
        let h = HeatField::from_heat(&q, HeatDirection::Forward, &c).unwrap();
        let r = vanishing_u_residual(&h);
        assert!(r.values().iter().all(|v| (v + 0.49 / 2.0).abs() < 1e-12));
        assert!(quantum_potential_thermalized(&q, &c).unwrap().max_magnitude() < 1e-10);
    }

    #[test]
    fn thermalized_box_heat() {
        let g = Grid::new_1d(0.0, 1.0, 2048).unwrap();
        let c = unit();
        let q = RealField::from_fn(&g, |p| 2f64.sqrt() * (PI * p[0]).sin());
        let u = quantum_potential_thermalized(&q, &c).unwrap();
        // Ū/Q = ħ²k²/(2mħω) off nodes
        let ratio = |i: usize| u.values()[i] / q.values()[i];
        for i in 10..g.len() - 10 {
            assert!((ratio(i) - PI * PI / 2.0).abs() < 1e-4, "{}", ratio(i));
        }
    }

    #[test]
    fn thermalized_local_box_heat() {
        let g = Grid::new_1d(0.0, 1.0, 2048).unwrap();
        let c = unit();
        let q = RealField::from_fn(&g, |p| c.thermal_energy() * 2f64.sqrt() * (PI * p[0]).sin());
        let u = quantum_potential_thermalized_local(&q, &c, 1e-8).unwrap();
        for i in u.interior_indices(3) {
            assert!((u.values()[i] - PI * PI / 2.0).abs() < 1e-4);
        }
    }

    #[test]
    fn diffusion_length_ratio_is_half() {
        for c in [unit(), PhysicalConstants::new(0.5, 3.0, 7.0).unwrap()] {
            let lap: Vec<f64> = (0..50).map(|i| -(PI * i as f64 / 49.0).sin() * PI * PI).collect();
            assert!((diffusion_length_ratio(&lap, &c).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!(diffusion_length_ratio(&[0.0; 4], &unit()).is_none());
    }

    #[test]
    fn thermalized_heat_kernel() {
        let g = Grid::new_1d(-8.0, 8.0, 1601).unwrap();
        let c = unit();
        let d = 0.5;
        let q = RealField::from_fn(&g, |p| kernel(p[0], 1.0, d));
        let u = quantum_potential_thermalized(&q, &c).unwrap();
        for i in 3..g.len() - 3 {
            let x = g.point(i)[0];
            let dtq = kernel(x, 1.0, d) * (x * x / (4.0 * d) - 0.5);
            let expect = -dtq / d / 2.0;
            assert!((u.values()[i] - expect).abs() < 1e-3);
        }
    }

    fn stack(g: &Grid, times: &[f64], f: impl Fn(f64, f64) -> f64) -> FieldStack<f64> {
        let mut s = FieldStack::new(g.clone());
        for &t in times {
            s.push(t, RealField::from_fn(g, |p| f(p[0], t))).unwrap();
        }
        s
    }

    #[test]
    fn heat_equation_residual_cases() {
        let c = unit();
        let d = c.diffusivity();
        let g = Grid::new_1d(-8.0, 8.0, 801).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 1.0 + 0.01 * k as f64).collect();
        let s = stack(&g, &times, |x, t| kernel(x, t, d));
        let r = heat_equation_residual(&s, &c).unwrap();
        for (k, f) in r.residual.fields().iter().enumerate() {
            let lap = laplacian(s.get(k)).unwrap().max_magnitude_interior(3);
            assert!(f.max_magnitude_interior(3) <= 1e-3 * lap, "{k}");
            let u = r.u_rendering.get(k);
            assert!((u.values()[100] + f.values()[100] / 4.0).abs() < 1e-15);
        }

        let s = stack(&g, &times, |x, _| 2.0 * x + 1.0);
        assert!(heat_equation_residual(&s, &c).unwrap().residual.fields().iter().all(|f| f.max_magnitude() < 1e-9));

        let k = 2.0;
        let w = d * k * k;
        let s = stack(&g, &times, |x, t| (-w * t).exp() * (k * x).cos());
        for f in heat_equation_residual(&s, &c).unwrap().residual.fields() {
            assert!(f.max_magnitude_interior(3) < 1e-3);
        }
        assert!(heat_equation_residual(&stack(&g, &times[..2], |x, _| x), &c).is_err());
    }

    #[test]
    fn density_change_matches_forward_heat_change() {
        // ∂P/∂t = -(P/ħω)∂Q_f/∂t holds exactly for ∂ₜ ln P; finite differences agree to O(dt²)
        let c = PhysicalConstants::new(1.0, 1.0, 3.0).unwrap();
        let g = Grid::new_1d(-6.0, 6.0, 241).unwrap();
        let times: Vec<f64> = (0..5).map(|k| 0.5 + 1e-3 * k as f64).collect();
        let p = stack(&g, &times, |x, t| kernel(x, t, 0.5));
        let q = heat_stack(&p, None, HeatDirection::Forward, &c, DEFAULT_NODE_EPSILON).unwrap();
        let dp = time_derivative(&p, 2).unwrap();
        let dq = time_derivative(&q, 2).unwrap();
        for i in (0..g.len()).filter(|&i| !q.get(2).is_masked(i)) {
            let pi = p.get(2).values()[i];
            let rhs = -pi / c.thermal_energy() * dq.values()[i];
            assert!(
                (dp.values()[i] - rhs).abs() < 1e-4 * (1e-3 + dp.values()[i].abs()),
                "{i} {} {rhs}",
                dp.values()[i]
            );
        }
    }
}
