//! Accumulation/depletion stripes: alternating extrema of P along one axis.
//!
//! Extrema are found by hysteresis: a maximum is accepted once P drops by
//! `prominence × max P` below it, a minimum once P rises by the same amount.
//! Accepted extrema therefore alternate by construction. Extrema sitting on
//! the first or last sample of the scanned range are dropped, and the rest
//! are refined by a three-point parabola.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::{FieldStack, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Accumulation,
    Depletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub position: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripeFrame {
    pub time: f64,
    pub extrema: Vec<Extremum>,
    /// Number of accumulation extrema.
    pub stripe_count: usize,
    /// Mean distance between neighbouring accumulation extrema.
    pub mean_spacing: Option<f64>,
}

impl StripeFrame {
    pub fn accumulations(&self) -> impl Iterator<Item = &Extremum> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Accumulation)
    }

    pub fn depletions(&self) -> impl Iterator<Item = &Extremum> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Depletion)
    }

    /// Kinds alternate and positions increase strictly.
    pub fn is_alternating(&self) -> bool {
        self.extrema.windows(2).all(|w| w[0].kind != w[1].kind && w[0].position < w[1].position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripeReport {
    pub axis: usize,
    pub prominence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 2]>,
    pub frames: Vec<StripeFrame>,
}

/// Profile of `p` along `axis`; for 2D fields the other axis is integrated out.
fn profile(p: &RealField, axis: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = p.grid();
    if axis >= g.dim() {
        return Err(invalid(format!("axis {axis} out of range for a {}D field", g.dim())));
    }
    let coords = g.axis(axis).coords();
    if g.dim() == 1 {
        return Ok((coords, p.values().to_vec()));
    }
    let other = 1 - axis;
    let w = g.spacing(other);
    let mut out = vec![0.0; coords.len()];
    for i in 0..g.len() {
        let idx = g.unravel(i);
        out[idx[axis]] += p.values()[i] * w;
    }
    Ok((coords, out))
}

fn refine(coords: &[f64], v: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return (coords[i], b);
    }
    let off = (0.5 * (a - c) / curv).clamp(-0.49, 0.49);
    let h = coords[i + 1] - coords[i];
    (coords[i] + off * h, b - 0.25 * (a - c) * off)
}

fn scan(coords: &[f64], v: &[f64], lo: usize, hi: usize, prominence: f64) -> Vec<Extremum> {
    let top = v[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom = v[lo..=hi].iter().cloned().fold(f64::INFINITY, f64::min);
    let delta = prominence * top;
    if !(top > 0.0) || top - bottom < delta || hi - lo < 2 {
        return Vec::new();
    }
    let mut raw: Vec<(usize, ExtremumKind)> = Vec::new();
    let (mut mx, mut mn) = (lo, lo);
    let mut seeking: Option<ExtremumKind> = None;
    for i in lo..=hi {
        if v[i] > v[mx] {
            mx = i;
        }
        if v[i] < v[mn] {
            mn = i;
        }
        let want_max = seeking != Some(ExtremumKind::Depletion);
        let want_min = seeking != Some(ExtremumKind::Accumulation);
        if want_max && v[i] < v[mx] - delta {
            raw.push((mx, ExtremumKind::Accumulation));
            mn = i;
            seeking = Some(ExtremumKind::Depletion);
        } else if want_min && v[i] > v[mn] + delta {
            raw.push((mn, ExtremumKind::Depletion));
            mx = i;
            seeking = Some(ExtremumKind::Accumulation);
        }
    }
    raw.into_iter()
        .filter(|&(i, _)| i > lo && i < hi)
        .map(|(i, kind)| {
            let (position, value) = refine(coords, v, i);
            Extremum { position, value, kind }
        })
        .collect()
}

/// Stripes of one density field, optionally restricted to `region` on the axis.
pub fn detect_stripe_frame(
    p: &RealField,
    axis: usize,
    prominence: f64,
    region: Option<[f64; 2]>,
) -> Result<StripeFrame> {
    if !(prominence > 0.0 && prominence < 1.0) {
        return Err(invalid(format!("prominence must lie in (0, 1), got {prominence}")));
    }
    let (coords, v) = profile(p, axis)?;
    let (lo, hi) = match region {
        None => (0, coords.len() - 1),
        Some([a, b]) => {
            let lo = coords.iter().position(|&x| x >= a);
            let hi = coords.iter().rposition(|&x| x <= b);
            match (lo, hi) {
                (Some(lo), Some(hi)) if lo < hi => (lo, hi),
                _ => (0, 0),
            }
        }
    };
    let extrema = if hi > lo { scan(&coords, &v, lo, hi, prominence) } else { Vec::new() };
    let acc: Vec<f64> = extrema.iter().filter(|e| e.kind == ExtremumKind::Accumulation).map(|e| e.position).collect();
    let mean_spacing = (acc.len() >= 2).then(|| (acc[acc.len() - 1] - acc[0]) / (acc.len() - 1) as f64);
    Ok(StripeFrame { time: p.meta.time.unwrap_or(0.0), stripe_count: acc.len(), mean_spacing, extrema })
}

/// Single-field report.
pub fn detect_stripes(p: &RealField, axis: usize, prominence: f64) -> Result<StripeReport> {
    let frame = detect_stripe_frame(p, axis, prominence, None)?;
    Ok(StripeReport { axis, prominence, region: None, frames: vec![frame] })
}

/// Report over every frame of a density stack.
pub fn stripe_report(
    p: &FieldStack<f64>,
    axis: usize,
    prominence: f64,
    region: Option<[f64; 2]>,
) -> Result<StripeReport> {
    let mut frames = Vec::with_capacity(p.len());
    for (t, f) in p.times().iter().zip(p.fields()) {
        let mut fr = detect_stripe_frame(f, axis, prominence, region)?;
        fr.time = *t;
        frames.push(fr);
    }
    Ok(StripeReport { axis, prominence, region, frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_squared_stripes() {
        let g = Grid::new_1d(0.0, 1.0, 1001).unwrap();
        let p = RealField::from_fn(&g, |x| (5.0 * PI * x[0]).sin().powi(2));
        let r = detect_stripes(&p, 0, 0.1).unwrap();
        let f = &r.frames[0];
        assert_eq!(f.stripe_count, 5);
        for (j, e) in f.accumulations().enumerate() {
            assert!((e.position - (2 * j + 1) as f64 / 10.0).abs() < 1e-6, "{e:?}");
            assert!((e.value - 1.0).abs() < 1e-6);
        }
        // interior minima only: the zeros at x = 0 and x = 1 are boundary samples
        let mins: Vec<f64> = f.depletions().map(|e| e.position).collect();
        assert_eq!(mins.len(), 4);
        assert!((f.mean_spacing.unwrap() - 0.2).abs() < 1e-6);
        assert!(f.is_alternating());
    }

    #[test]
    fn monotone_and_flat_are_empty() {
        let g = Grid::new_1d(0.0, 1.0, 200).unwrap();
        let up = RealField::from_fn(&g, |x| x[0] * x[0]);
        assert!(detect_stripes(&up, 0, 0.05).unwrap().frames[0].extrema.is_empty());
        let flat = RealField::from_fn(&g, |_| 0.3);
        assert!(detect_stripes(&flat, 0, 0.05).unwrap().frames[0].extrema.is_empty());
        let zero = RealField::zeros(&g);
        assert!(detect_stripes(&zero, 0, 0.05).unwrap().frames[0].extrema.is_empty());
        assert!(detect_stripes(&up, 0, 0.0).is_err());
        assert!(detect_stripes(&up, 1, 0.5).is_err());
    }

    #[test]
    fn small_ripples_ignored() {
        let g = Grid::new_1d(-5.0, 5.0, 2001).unwrap();
        let p = RealField::from_fn(&g, |x| (-x[0] * x[0]).exp() * (1.0 + 0.01 * (40.0 * x[0]).sin()));
        let f = &detect_stripes(&p, 0, 0.05).unwrap().frames[0];
        assert_eq!(f.stripe_count, 1);
        assert!(f.extrema.len() == 1);
    }

    #[test]
    fn region_and_marginal() {
        let g = Grid::new_1d(0.0, 1.0, 1001).unwrap();
        let p = RealField::from_fn(&g, |x| (5.0 * PI * x[0]).sin().powi(2));
        let f = detect_stripe_frame(&p, 0, 0.1, Some([0.0, 0.45])).unwrap();
        assert_eq!(f.stripe_count, 2);

        let g2 = Grid::new_2d((0.0, 1.0, 201), (0.0, 2.0, 50)).unwrap();
        let p2 = RealField::from_fn(&g2, |x| (5.0 * PI * x[0]).sin().powi(2) * (1.0 + x[1]));
        let f2 = &detect_stripes(&p2, 0, 0.1).unwrap().frames[0];
        assert_eq!(f2.stripe_count, 5);
        let fy = &detect_stripes(&p2, 1, 0.1).unwrap().frames[0];
        assert_eq!(fy.stripe_count, 0);
    }

    proptest! {
        #[test]
        fn extrema_alternate(vals in prop::collection::vec(0.0f64..1.0, 16..200), prom in 0.01f64..0.9) {
            let g = Grid::new_1d(0.0, 1.0, vals.len()).unwrap();
            let p = RealField::new(g, vals).unwrap();
            let f = &detect_stripes(&p, 0, prom).unwrap().frames[0];
            prop_assert!(f.is_alternating());
            let n_dep = f.depletions().count();
            prop_assert!(f.stripe_count.abs_diff(n_dep) <= 1);
        }
    }
}
