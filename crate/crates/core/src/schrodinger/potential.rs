use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::{Grid, RealField};

/// External potential. Barriers and wells vary along the first axis only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Free,
    SquareBarrier {
        height: f64,
        left: f64,
        right: f64,
        /// Width (in cells) of a moving-average ramp applied to the step; 0 keeps it sharp.
        #[serde(default)]
        smoothing_cells: usize,
    },
    /// Hard walls: ψ is pinned to zero at and beyond `left`/`right`.
    InfiniteWell { left: f64, right: f64 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::SquareBarrier { height, left, right, .. } => {
                if !height.is_finite() {
                    return Err(invalid("barrier height must be finite"));
                }
                if !(left < right) {
                    return Err(invalid(format!("barrier left {left} must be < right {right}")));
                }
                Ok(())
            }
            PotentialSpec::InfiniteWell { left, right } => {
                if !(left < right) {
                    return Err(invalid(format!("well left {left} must be < right {right}")));
                }
                Ok(())
            }
        }
    }

    fn value_at(&self, x: f64) -> f64 {
        match *self {
            PotentialSpec::SquareBarrier { height, left, right, .. } if x >= left && x <= right => height,
            _ => 0.0,
        }
    }

    /// Potential values on the grid (finite everywhere; wells contribute 0
    /// and act through [`PotentialSpec::pinned`]).
    pub fn sample(&self, grid: &Grid) -> Result<RealField> {
        self.validate()?;
        let mut v = RealField::from_fn(grid, |p| self.value_at(p[0])).with_label("V");
        if let PotentialSpec::SquareBarrier { smoothing_cells, .. } = *self {
            if smoothing_cells > 0 {
                smooth_along_x(&mut v, smoothing_cells);
            }
        }
        Ok(v)
    }

    /// Cells where ψ is held at zero: the grid ends and, for wells, every
    /// cell at or outside the walls.
    pub fn pinned(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.len())
            .map(|i| {
                let edge = grid.cells_from_edge(i) == 0;
                let x = grid.point(i)[0];
                let outside = matches!(*self, PotentialSpec::InfiniteWell { left, right } if x <= left || x >= right);
                edge || outside
            })
            .collect()
    }
}

fn smooth_along_x(v: &mut RealField, half: usize) {
    let grid = v.grid().clone();
    let (lines, len, stride) = grid.lines(0);
    let src = v.values().to_vec();
    let out = v.values_mut();
    for l in 0..lines {
        let start = grid.line_start(0, l);
        for k in 0..len {
            let lo = k.saturating_sub(half);
            let hi = (k + half).min(len - 1);
            let sum: f64 = (lo..=hi).map(|j| src[start + j * stride]).sum();
            out[start + k * stride] = sum / (hi - lo + 1) as f64;
        }
    }
}
