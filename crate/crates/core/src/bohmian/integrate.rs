//! RK4 integration of the first-order guidance law along a ψ stack.

use log::debug;
use num_complex::Complex64;
use serde::Serialize;

use super::seeding::SeedMethod;
use super::velocity::{interpolate, velocity_field, Interpolation};
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::fields::{Axis, FieldStack};
use crate::qpotential::clearance_mask;
use crate::schrodinger::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub scheme: Interpolation,
    /// RK4 substeps per stack interval.
    pub substeps: usize,
    /// Cells around a node inside which step halvings are logged as events.
    pub node_cells: usize,
    pub max_halvings: u32,
    /// Trajectories are clamped this many cells inside the grid edges.
    pub boundary_cells: usize,
    pub eps_node: f64,
    pub exec: Execution,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            scheme: Interpolation::Linear,
            substeps: 1,
            node_cells: 2,
            max_halvings: 20,
            boundary_cells: 1,
            eps_node: crate::qpotential::DEFAULT_NODE_EPSILON,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Step size was halved near a node; `halvings` is the deepest level used.
    NodeRefinement,
    /// Position clamped at the boundary margin.
    BoundaryClamp,
    /// Halving limit exceeded; the trajectory stops here.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub trajectory: usize,
    pub time: f64,
    pub position: f64,
    pub kind: EventKind,
    pub halvings: u32,
}

/// Trajectories sampled at the stack times. `positions[j][k]` is trajectory
/// j at `times[k]`; samples at or after `incomplete_from[j]` are invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub seeds: Vec<f64>,
    pub method: SeedMethod,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub incomplete_from: Vec<Option<usize>>,
    pub events: Vec<TrajectoryEvent>,
    pub scheme: Interpolation,
    pub dt: f64,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn is_complete(&self, j: usize) -> bool {
        self.incomplete_from[j].is_none()
    }

    pub fn valid(&self, j: usize, k: usize) -> bool {
        self.incomplete_from[j].is_none_or(|s| k < s)
    }

    /// Positions of all valid trajectories at time index `k`.
    pub fn snapshot(&self, k: usize) -> Vec<f64> {
        (0..self.len()).filter(|&j| self.valid(j, k)).map(|j| self.positions[j][k]).collect()
    }

    /// Number of adjacent pairs (in seed order) whose order is reversed at time index `k`.
    pub fn ordering_violations(&self, k: usize) -> usize {
        let idx: Vec<usize> = (0..self.len()).filter(|&j| self.valid(j, k)).collect();
        idx.windows(2).filter(|w| self.positions[w[0]][k] > self.positions[w[1]][k]).count()
    }
}

struct Frames<'a> {
    axis: &'a Axis,
    times: &'a [f64],
    v: Vec<Vec<f64>>,
    near_node: Vec<Vec<bool>>,
    scheme: Interpolation,
}

impl Frames<'_> {
    fn velocity(&self, k: usize, t: f64, x: f64) -> f64 {
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let a = interpolate(self.axis, &self.v[k], x, self.scheme);
        let b = interpolate(self.axis, &self.v[k + 1], x, self.scheme);
        a * (1.0 - w) + b * w
    }

    fn near_node(&self, k: usize, x: f64) -> bool {
        let n = self.axis.points;
        let i = self.axis.fractional_index(x).round().clamp(0.0, (n - 1) as f64) as usize;
        self.near_node[k][i] || self.near_node[k + 1][i]
    }

    fn rk4(&self, k: usize, t: f64, x: f64, dt: f64) -> f64 {
        let k1 = self.velocity(k, t, x);
        let k2 = self.velocity(k, t + 0.5 * dt, x + 0.5 * dt * k1);
        let k3 = self.velocity(k, t + 0.5 * dt, x + 0.5 * dt * k2);
        let k4 = self.velocity(k, t + dt, x + dt * k3);
        x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    /// Step-doubling advance; a step is accepted when the two estimates agree to
    /// `tol` and it moves at most `max_move`. Returns the new position and deepest
    /// halving, or `None` when the limit is exceeded.
    #[allow(clippy::too_many_arguments)]
    fn adaptive(
        &self,
        k: usize,
        t: f64,
        x: f64,
        dt: f64,
        depth: u32,
        max: u32,
        tol: f64,
        max_move: f64,
    ) -> Option<(f64, u32)> {
        let full = self.rk4(k, t, x, dt);
        let mid = self.rk4(k, t, x, 0.5 * dt);
        let half = self.rk4(k, t + 0.5 * dt, mid, 0.5 * dt);
        if (full - half).abs() <= tol && (half - x).abs() <= max_move {
            return Some((half, depth));
        }
        if depth >= max {
            return None;
        }
        let (m, d1) = self.adaptive(k, t, x, 0.5 * dt, depth + 1, max, tol, max_move)?;
        let (e, d2) = self.adaptive(k, t + 0.5 * dt, m, 0.5 * dt, depth + 1, max, tol, max_move)?;
        Some((e, d1.max(d2)))
    }
}

struct Path {
    x: Vec<f64>,
    v: Vec<f64>,
    incomplete_from: Option<usize>,
    events: Vec<TrajectoryEvent>,
}

/// Integrate dx/dt = v(x, t) for each seed across the whole stack (1D).
pub fn integrate(
    psi: &FieldStack<Complex64>,
    seeds: &[f64],
    method: SeedMethod,
    c: &PhysicalConstants,
    opts: &IntegratorOptions,
) -> Result<TrajectoryEnsemble> {
    let grid = psi.grid();
    if grid.dim() != 1 {
        return Err(invalid("trajectory integration is one-dimensional"));
    }
    if psi.len() < 2 {
        return Err(invalid("trajectory integration needs ≥ 2 stack frames"));
    }
    if opts.substeps == 0 {
        return Err(invalid("substeps must be ≥ 1"));
    }
    let axis = grid.axis(0);
    if let Some(s) = seeds.iter().find(|&&s| !axis.contains(s)) {
        return Err(invalid(format!("seed {s} lies outside [{}, {}]", axis.min, axis.max)));
    }
    let per_frame: Vec<Result<(Vec<f64>, Vec<bool>)>> = opts.exec.map(psi.fields(), |f| {
        let v = velocity_field(f, c, opts.eps_node)?.remove(0);
        let mask = v.mask().map(<[bool]>::to_vec).unwrap_or_else(|| vec![false; v.len()]);
        let near = clearance_mask(grid, &mask, opts.node_cells, 0);
        Ok((v.into_values(), near))
    });
    let mut v = Vec::with_capacity(psi.len());
    let mut near_node = Vec::with_capacity(psi.len());
    for r in per_frame {
        let (a, b) = r?;
        v.push(a);
        near_node.push(b);
    }
    let frames = Frames { axis, times: psi.times(), v, near_node, scheme: opts.scheme };

    let h = axis.spacing();
    let vmax = frames.v.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let times = psi.times();
    let dt_max = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max) / opts.substeps as f64;
    if vmax * dt_max > 4.0 * h {
        debug!("|v|·dt = {:.3e} exceeds 4h = {:.3e}; steps will be subdivided", vmax * dt_max, 4.0 * h);
    }
    let lo = axis.min + opts.boundary_cells as f64 * h;
    let hi = axis.max - opts.boundary_cells as f64 * h;
    let tol = 1e-6 * h;
    let max_move = 2.0 * h;

    let paths: Vec<Path> = opts.exec.map_range(seeds.len(), |j| {
        let mut x = seeds[j].clamp(lo, hi);
        let mut path =
            Path { x: vec![x], v: vec![frames.velocity(0, times[0], x)], incomplete_from: None, events: Vec::new() };
        let mut clamped = false;
        'frames: for k in 0..times.len() - 1 {
            let dt = (times[k + 1] - times[k]) / opts.substeps as f64;
            for s in 0..opts.substeps {
                let t = times[k] + s as f64 * dt;
                match frames.adaptive(k, t, x, dt, 0, opts.max_halvings, tol, max_move) {
                    Some((nx, depth)) => {
                        if depth > 0 && frames.near_node(k, x) {
                            path.events.push(TrajectoryEvent {
                                trajectory: j,
                                time: t,
                                position: x,
                                kind: EventKind::NodeRefinement,
                                halvings: depth,
                            });
                        }
                        x = nx;
                    }
                    None => {
                        path.events.push(TrajectoryEvent {
                            trajectory: j,
                            time: t,
                            position: x,
                            kind: EventKind::Incomplete,
                            halvings: opts.max_halvings,
                        });
                        path.incomplete_from = Some(k + 1);
                        break 'frames;
                    }
                }
                if x < lo || x > hi {
                    x = x.clamp(lo, hi);
                    if !clamped {
                        path.events.push(TrajectoryEvent {
                            trajectory: j,
                            time: t + dt,
                            position: x,
                            kind: EventKind::BoundaryClamp,
                            halvings: 0,
                        });
                    }
                    clamped = true;
                }
            }
            path.x.push(x);
            path.v.push(interpolate(axis, &frames.v[k + 1], x, opts.scheme));
        }
        // pad invalid tail so every row has one entry per time
        while path.x.len() < times.len() {
            path.x.push(x);
            path.v.push(0.0);
        }
        path
    });

    let mut ens = TrajectoryEnsemble {
        seeds: seeds.to_vec(),
        method,
        times: times.to_vec(),
        positions: Vec::with_capacity(seeds.len()),
        velocities: Vec::with_capacity(seeds.len()),
        incomplete_from: Vec::with_capacity(seeds.len()),
        events: Vec::new(),
        scheme: opts.scheme,
        dt: dt_max,
    };
    for p in paths {
        ens.positions.push(p.x);
        ens.velocities.push(p.v);
        ens.incomplete_from.push(p.incomplete_from);
        ens.events.extend(p.events);
    }
    Ok(ens)
}
