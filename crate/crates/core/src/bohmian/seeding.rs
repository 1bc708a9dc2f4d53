use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::RealField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedMethod {
    /// Positions at cumulative-probability levels (i - ½)/count.
    #[default]
    Quantile,
    /// Evenly spaced over the grid, ignoring the density.
    Uniform,
    /// Independent draws from the density with a fixed generator seed.
    Random { seed: u64 },
}

impl SeedMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SeedMethod::Quantile => "quantile",
            SeedMethod::Uniform => "uniform",
            SeedMethod::Random { .. } => "random",
        }
    }
}

/// Piecewise-quadratic CDF of a density sampled on a 1D grid (exact for
/// the piecewise-linear interpolant of P).
#[derive(Debug, Clone)]
pub struct DensityCdf {
    coords: Vec<f64>,
    p: Vec<f64>,
    cum: Vec<f64>,
    h: f64,
}

impl DensityCdf {
    pub fn new(p: &RealField) -> Result<Self> {
        if p.grid().dim() != 1 {
            return Err(invalid("density CDF needs a one-dimensional grid"));
        }
        p.ensure_finite()?;
        if p.values().iter().any(|&v| v < 0.0) {
            return Err(invalid("density has negative samples"));
        }
        let axis = p.grid().axis(0);
        let h = axis.spacing();
        let vals = p.values().to_vec();
        let mut cum = vec![0.0; vals.len()];
        for i in 1..vals.len() {
            cum[i] = cum[i - 1] + 0.5 * h * (vals[i - 1] + vals[i]);
        }
        let total = *cum.last().unwrap();
        if !(total > 0.0 && total.is_finite()) {
            return Err(invalid("density is not normalizable"));
        }
        let p = vals.iter().map(|v| v / total).collect();
        for c in cum.iter_mut() {
            *c /= total;
        }
        Ok(DensityCdf { coords: axis.coords(), p, cum, h })
    }

    /// F(x), clamped to [0, 1] outside the grid.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.coords.len();
        if x <= self.coords[0] {
            return 0.0;
        }
        if x >= self.coords[n - 1] {
            return 1.0;
        }
        let i = (((x - self.coords[0]) / self.h).floor() as usize).min(n - 2);
        let s = x - self.coords[i];
        self.cum[i] + self.p[i] * s + (self.p[i + 1] - self.p[i]) * s * s / (2.0 * self.h)
    }

    /// Smallest x with F(x) = u.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.coords.len();
        let u = u.clamp(0.0, 1.0);
        let i = match self.cum.partition_point(|&c| c < u) {
            0 => return self.coords[0],
            k if k >= n => return self.coords[n - 1],
            k => k - 1,
        };
        let target = u - self.cum[i];
        let (a, b) = ((self.p[i + 1] - self.p[i]) / (2.0 * self.h), self.p[i]);
        let s = if a.abs() < 1e-300 || (a * target).abs() < 1e-14 * b * b {
            if b > 0.0 {
                target / b
            } else {
                0.0
            }
        } else {
            // a s² + b s - target = 0; numerically stable positive root
            let disc = (b * b + 4.0 * a * target).max(0.0).sqrt();
            2.0 * target / (b + disc)
        };
        self.coords[i] + s.clamp(0.0, self.h)
    }
}

/// Initial positions for an ensemble, sorted ascending.
pub fn seed_from_density(p0: &RealField, count: usize, method: SeedMethod) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("seed count must be ≥ 1"));
    }
    let cdf = DensityCdf::new(p0)?;
    let mut seeds: Vec<f64> = match method {
        SeedMethod::Quantile => (0..count).map(|i| cdf.quantile((i as f64 + 0.5) / count as f64)).collect(),
        SeedMethod::Uniform => {
            let a = p0.grid().axis(0);
            (0..count).map(|i| a.min + (a.max - a.min) * (i as f64 + 0.5) / count as f64).collect()
        }
        SeedMethod::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| cdf.quantile(rng.gen::<f64>())).collect()
        }
    };
    seeds.sort_by(f64::total_cmp);
    Ok(seeds)
}

/// ∫|F_emp - F| dF for sorted `positions` against the exact CDF.
pub fn cdf_l1_distance(positions: &[f64], cdf: &DensityCdf) -> f64 {
    let n = positions.len() as f64;
    let mut sorted = positions.to_vec();
    sorted.sort_by(f64::total_cmp);
    // on each stretch where F_emp = c, integrate |u - c| for u between the exact CDF values
    let seg = |u0: f64, u1: f64, c: f64| -> f64 {
        let f = |u: f64| 0.5 * (u - c) * (u - c).abs();
        f(u1) - f(u0)
    };
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let u = cdf.cdf(x);
        total += seg(prev, u, i as f64 / n);
        prev = u;
    }
    total + seg(prev, 1.0, 1.0)
}
