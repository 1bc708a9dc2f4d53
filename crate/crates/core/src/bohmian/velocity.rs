use crate::error::Result;
use crate::fields::{phase_gradient, phase_slips, Axis, ComplexField, RealField};
use crate::qpotential::node_mask;
use crate::schrodinger::PhysicalConstants;

/// Guidance velocity v = (ħ/m)∇S/ħ per axis. Node cells carry the mask; in
/// 1D their values are linearly interpolated from the nearest unmasked
/// neighbours so an integrator can still sample them.
pub fn velocity_field(psi: &ComplexField, c: &PhysicalConstants, eps_node: f64) -> Result<Vec<RealField>> {
    let mask: Vec<bool> =
        node_mask(&psi.density(), eps_node).into_iter().zip(phase_slips(psi)).map(|(a, b)| a || b).collect();
    let scale = c.hbar() / c.mass();
    let mut out = Vec::new();
    for g in phase_gradient(psi)? {
        let mut v = g.scaled(scale).with_label("v").with_mask(Some(mask.clone()));
        if psi.grid().dim() == 1 {
            fill_gaps(v.values_mut(), &mask);
        } else {
            for (x, &m) in v.values_mut().iter_mut().zip(&mask) {
                if m {
                    *x = 0.0;
                }
            }
        }
        v.meta.time = psi.meta.time;
        out.push(v);
    }
    Ok(out)
}

fn fill_gaps(v: &mut [f64], mask: &[bool]) {
    let n = v.len();
    let mut i = 0;
    while i < n {
        if !mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && mask[i] {
            i += 1;
        }
        let left = start.checked_sub(1).map(|j| v[j]);
        let right = (i < n).then(|| v[i]);
        for (k, slot) in v[start..i].iter_mut().enumerate() {
            *slot = match (left, right) {
                (Some(a), Some(b)) => a + (b - a) * (k + 1) as f64 / (i - start + 1) as f64,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => 0.0,
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    Cubic,
}

impl Interpolation {
    pub fn name(self) -> &'static str {
        match self {
            Interpolation::Linear => "rk4-linear",
            Interpolation::Cubic => "rk4-cubic",
        }
    }
}

/// Sample `values` on `axis` at `x` (clamped to the grid).
pub fn interpolate(axis: &Axis, values: &[f64], x: f64, scheme: Interpolation) -> f64 {
    let n = values.len();
    let f = axis.fractional_index(x).clamp(0.0, (n - 1) as f64);
    let i = (f.floor() as usize).min(n - 2);
    let w = f - i as f64;
    match scheme {
        Interpolation::Cubic if i >= 1 && i + 2 < n => {
            let (a, b, c, d) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
            let wm1 = -w * (w - 1.0) * (w - 2.0) / 6.0;
            let w0 = (w + 1.0) * (w - 1.0) * (w - 2.0) / 2.0;
            let w1 = -(w + 1.0) * w * (w - 2.0) / 2.0;
            let w2 = (w + 1.0) * w * (w - 1.0) / 6.0;
            wm1 * a + w0 * b + w1 * c + w2 * d
        }
        _ => values[i] * (1.0 - w) + values[i + 1] * w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::qpotential::DEFAULT_NODE_EPSILON;
    use crate::schrodinger::{superpose, WavePacketSpec};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_velocity() {
        let c = PhysicalConstants::new(1.0, 2.0, 1.0).unwrap();
        let g = Grid::new_1d(0.0, 10.0, 300).unwrap();
        let psi = ComplexField::from_fn(&g, |p| Complex64::from_polar(1.0, 1.5 * p[0]));
        let v = velocity_field(&psi, &c, DEFAULT_NODE_EPSILON).unwrap();
        assert!(v[0].values().iter().all(|x| (x - 0.75).abs() < 1e-12));
    }

    #[test]
    fn real_state_is_static() {
        let g = Grid::new_1d(0.0, 1.0, 200).unwrap();
        let psi = ComplexField::from_fn(&g, |p| Complex64::new((2.0 * PI * p[0]).sin(), 0.0));
        let v = velocity_field(&psi, &PhysicalConstants::default(), DEFAULT_NODE_EPSILON).unwrap();
        assert!(v[0].values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn symmetric_pair_has_still_midpoint() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(-15.0, 15.0, 1001).unwrap();
        let l = WavePacketSpec::new(-5.0, 1.0, 2.0);
        let r = WavePacketSpec::new(5.0, 1.0, -2.0);
        for t in [0.0, 1.0, 2.5, 4.0] {
            let psi = superpose(&[(l, t), (r, t)], &c, &g).unwrap();
            let v = velocity_field(&psi, &c, DEFAULT_NODE_EPSILON).unwrap();
            assert_eq!(v[0].values()[500], 0.0);
            for i in 0..500 {
                assert_eq!(v[0].values()[i], -v[0].values()[1000 - i]);
            }
        }
    }

    #[test]
    fn masked_gaps_are_bridged() {
        let mut v = vec![1.0, 0.0, 0.0, 4.0, 0.0];
        fill_gaps(&mut v, &[false, true, true, false, true]);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn interpolation_orders() {
        let a = Axis::new(0.0, 1.0, 11).unwrap();
        let lin: Vec<f64> = a.coords().iter().map(|x| 2.0 * x + 1.0).collect();
        let cub: Vec<f64> = a.coords().iter().map(|x| x * x * x).collect();
        assert!((interpolate(&a, &lin, 0.537, Interpolation::Linear) - 2.074).abs() < 1e-14);
        assert!((interpolate(&a, &cub, 0.537, Interpolation::Cubic) - 0.537f64.powi(3)).abs() < 1e-14);
        assert_eq!(interpolate(&a, &lin, -3.0, Interpolation::Linear), 1.0);
    }
}
