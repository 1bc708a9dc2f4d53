use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points along any axis.
pub const MIN_POINTS: usize = 8;

/// One uniformly sampled axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid("axis extents must be finite".into()));
        }
        if max <= min {
            return Err(Error::InvalidGrid(format!("extent_max {max} must exceed extent_min {min}")));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("point_count {points} < {MIN_POINTS}")));
        }
        Ok(Axis { min, max, points })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    /// Coordinate of sample `i`. Written so that a grid symmetric about zero
    /// yields exactly mirrored coordinates.
    pub fn coord(&self, i: usize) -> f64 {
        let n = (self.points - 1) as f64;
        let i = i as f64;
        (self.min * (n - i) + self.max * i) / n
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Fractional index of `x`; may fall outside `[0, points-1]`.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

/// Tensor-product uniform grid in one or two dimensions. Two-dimensional
/// samples are stored row-major with axis order (x, y): `index = ix * ny + iy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{1, 2}}", axes.len())));
        }
        for a in &axes {
            Axis::new(a.min, a.max, a.points)?;
        }
        Ok(Grid { axes })
    }

    pub fn new_1d(min: f64, max: f64, points: usize) -> Result<Self> {
        Grid::new(vec![Axis::new(min, max, points)?])
    }

    pub fn new_2d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Grid::new(vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, index: usize) -> [usize; 2] {
        match self.dim() {
            1 => [index, 0],
            _ => {
                let ny = self.axes[1].points;
                [index / ny, index % ny]
            }
        }
    }

    pub fn ravel(&self, ix: usize, iy: usize) -> usize {
        match self.dim() {
            1 => ix,
            _ => ix * self.axes[1].points + iy,
        }
    }

    /// Physical coordinates of a flat index (unused components are zero).
    pub fn point(&self, index: usize) -> [f64; 2] {
        let [ix, iy] = self.unravel(index);
        match self.dim() {
            1 => [self.axes[0].coord(ix), 0.0],
            _ => [self.axes[0].coord(ix), self.axes[1].coord(iy)],
        }
    }

    /// Distance (in cells) of a flat index from the nearest grid edge.
    pub fn cells_from_edge(&self, index: usize) -> usize {
        let idx = self.unravel(index);
        self.axes.iter().zip(idx).map(|(a, i)| i.min(a.points - 1 - i)).min().unwrap_or(0)
    }

    /// Cell volume used by the trapezoid quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    /// Trapezoid weight of a flat index (cell volume included).
    pub fn quadrature_weight(&self, index: usize) -> f64 {
        let idx = self.unravel(index);
        self.axes
            .iter()
            .zip(idx)
            .map(|(a, i)| {
                let w = if i == 0 || i == a.points - 1 { 0.5 } else { 1.0 };
                w * a.spacing()
            })
            .product()
    }

    /// Layout of the 1D lines running along `axis`: (line count, line length, stride).
    pub(crate) fn lines(&self, axis: usize) -> (usize, usize, usize) {
        match (self.dim(), axis) {
            (1, _) => (1, self.axes[0].points, 1),
            (_, 0) => (self.axes[1].points, self.axes[0].points, self.axes[1].points),
            _ => (self.axes[0].points, self.axes[1].points, 1),
        }
    }

    /// Flat index of the first sample of line `l` along `axis`.
    pub(crate) fn line_start(&self, axis: usize, l: usize) -> usize {
        match (self.dim(), axis) {
            (1, _) => 0,
            (_, 0) => l,
            _ => l * self.axes[1].points,
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.axes, other.axes)));
        }
        Ok(())
    }
}
