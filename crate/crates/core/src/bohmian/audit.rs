//! Second-order check m dv/dt = -∇(V + U) along integrated trajectories.

use serde::Serialize;

use super::integrate::TrajectoryEnsemble;
use super::velocity::{interpolate, Interpolation};
use crate::error::{invalid, Result};
use crate::fields::{gradient, laplacian, FieldStack, RealField};
use crate::qpotential::{clearance_mask, diffusion_length_ratio};
use crate::schrodinger::PhysicalConstants;

#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderReport {
    /// Per trajectory: max_k |m a_k - F_k| / max_k |F_k| over interior samples.
    pub mismatches: Vec<f64>,
    pub max_mismatch: f64,
    pub median_mismatch: f64,
    pub used: usize,
    pub excluded_incomplete: usize,
    /// Trajectories whose force stays below `force_floor` of the ensemble maximum.
    pub excluded_weak_force: usize,
    /// Ratio of -(L/2)²∇²Q to the thermalized Ū on the supplied heat stack.
    pub diffusion_length_ratio: Option<f64>,
}

pub const FORCE_FLOOR: f64 = 1e-3;

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Compare the finite-differenced acceleration of each trajectory with the
/// force from `u` (and `v_ext`, if any) at the recorded positions. Samples
/// within two cells of masked U cells are skipped.
pub fn second_order_audit(
    ens: &TrajectoryEnsemble,
    u: &FieldStack<f64>,
    v_ext: Option<&RealField>,
    heat: Option<&FieldStack<f64>>,
    c: &PhysicalConstants,
) -> Result<SecondOrderReport> {
    if u.times() != ens.times.as_slice() {
        return Err(invalid("U stack and ensemble must share their sample times"));
    }
    if ens.times.len() < 3 {
        return Err(invalid("second-order audit needs ≥ 3 samples"));
    }
    let grid = u.grid();
    let axis = grid.axis(0);
    let mut forces = Vec::with_capacity(u.len());
    let mut skip = Vec::with_capacity(u.len());
    for f in u.fields() {
        let total = match v_ext {
            Some(v) => f.zip_with(v, |a, b| a + b)?,
            None => f.clone(),
        };
        let g = gradient(&total)?.remove(0);
        let mask = f.mask().map(<[bool]>::to_vec).unwrap_or_else(|| vec![false; f.len()]);
        skip.push(clearance_mask(grid, &mask, 2, 3));
        forces.push(g.values().iter().map(|x| -x).collect::<Vec<f64>>());
    }
    let t = &ens.times;
    let m = c.mass();
    let mut per_traj: Vec<(f64, f64)> = Vec::new();
    let mut excluded_incomplete = 0;
    for j in 0..ens.len() {
        if !ens.is_complete(j) {
            excluded_incomplete += 1;
            continue;
        }
        let (mut worst, mut fmax) = (0.0f64, 0.0f64);
        for k in 1..t.len() - 1 {
            let x = ens.positions[j][k];
            let i = axis.fractional_index(x).round().clamp(0.0, (axis.points - 1) as f64) as usize;
            if skip[k][i] {
                continue;
            }
            let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
            let vel = &ens.velocities[j];
            let acc = -h1 / (h0 * (h0 + h1)) * vel[k - 1]
                + (h1 - h0) / (h0 * h1) * vel[k]
                + h0 / (h1 * (h0 + h1)) * vel[k + 1];
            let f = interpolate(axis, &forces[k], x, Interpolation::Linear);
            worst = worst.max((m * acc - f).abs());
            fmax = fmax.max(f.abs());
        }
        per_traj.push((worst, fmax));
    }
    let global = per_traj.iter().map(|p| p.1).fold(0.0, f64::max);
    // forces at roundoff level of a flat U: ~1e3 ε ħ²/(m h³)
    let h = axis.spacing();
    let noise = 1e3 * f64::EPSILON * c.hbar() * c.hbar() / (m * h * h * h);
    let mut mismatches = Vec::new();
    let mut excluded_weak_force = 0;
    for (w, f) in per_traj {
        if f <= FORCE_FLOOR * global || f <= noise {
            excluded_weak_force += 1;
        } else {
            mismatches.push(w / f);
        }
    }
    let max_mismatch = mismatches.iter().cloned().fold(0.0, f64::max);
    let median_mismatch = median(&mut mismatches.clone());
    let ratio = match heat {
        Some(q) => {
            let laps: Result<Vec<RealField>> = q.fields().iter().map(laplacian).collect();
            let flat: Vec<f64> =
                laps?.iter().flat_map(|l| l.interior_indices(3).map(|i| l.values()[i]).collect::<Vec<_>>()).collect();
            diffusion_length_ratio(&flat, c)
        }
        None => None,
    };
    Ok(SecondOrderReport {
        used: mismatches.len(),
        mismatches,
        max_mismatch,
        median_mismatch,
        excluded_incomplete,
        excluded_weak_force,
        diffusion_length_ratio: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohmian::{integrate, seed_from_density, IntegratorOptions, SeedMethod};
    use crate::fields::{ComplexField, Grid};
    use crate::qpotential::{decompose, quantum_potential_canonical, DEFAULT_NODE_EPSILON};
    use crate::schrodinger::{gaussian_packet, CrankNicolson, PotentialSpec, WavePacketSpec};
    use num_complex::Complex64;

    fn u_stack(psi: &FieldStack<Complex64>, c: &PhysicalConstants) -> FieldStack<f64> {
        psi.map(|f| {
            quantum_potential_canonical(&decompose(f, c.hbar(), DEFAULT_NODE_EPSILON).unwrap(), c).unwrap().field
        })
        .unwrap()
    }

    #[test]
    fn plane_wave_has_no_force() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(0.0, 10.0, 200).unwrap();
        let mut s = FieldStack::new(g.clone());
        for k in 0..5 {
            let t = 0.1 * k as f64;
            s.push(t, ComplexField::from_fn(&g, |p| Complex64::from_polar(1.0, p[0] - 0.5 * t))).unwrap();
        }
        let e = integrate(&s, &[2.0, 3.0], SeedMethod::Uniform, &c, &IntegratorOptions::default()).unwrap();
        let r = second_order_audit(&e, &u_stack(&s, &c), None, None, &c).unwrap();
        assert_eq!(r.used, 0);
        assert_eq!(r.excluded_weak_force, 2);
    }

    #[test]
    fn free_gaussian_consistency() {
        let c = PhysicalConstants::default();
        let g = Grid::new_1d(-20.0, 20.0, 2048).unwrap();
        let psi0 = gaussian_packet(&WavePacketSpec::new(-2.0, 1.0, 1.0), &c, 0.0, &g).unwrap().psi;
        let s = CrankNicolson::new(&g, &PotentialSpec::Free, &c, 1e-3).unwrap().evolve(&psi0, 1000, 10).unwrap();
        let seeds = seed_from_density(&psi0.density(), 41, SeedMethod::Quantile).unwrap();
        let e =
            integrate(&s, &seeds, SeedMethod::Quantile, &c, &IntegratorOptions { substeps: 10, ..Default::default() })
                .unwrap();
        let r = second_order_audit(&e, &u_stack(&s, &c), None, None, &c).unwrap();
        assert!(r.used > 30);
        assert!(r.median_mismatch <= 0.05, "{r:?}");
    }
}
