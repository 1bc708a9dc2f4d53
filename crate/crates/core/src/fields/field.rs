use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Scalar sample type stored in a field: `f64` or `Complex64`.
pub trait Sample:
    Copy + Send + Sync + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    const ZERO: Self;
    fn is_finite_sample(&self) -> bool;
    fn magnitude(&self) -> f64;
}

impl Sample for f64 {
    const ZERO: Self = 0.0;
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldMeta {
    /// Quantity label (P, R, S, U, Q, psi, ...).
    pub label: Option<String>,
    pub time: Option<f64>,
    /// Number of cells at each edge computed with reduced-accuracy stencils.
    pub low_accuracy_margin: usize,
}

/// Samples of a scalar quantity on a [`Grid`], with an optional mask of
/// excluded cells (nodes of a wavefunction, for ratio quantities).
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
    mask: Option<Vec<bool>>,
    pub meta: FieldMeta,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        Ok(Field { grid, values, mask: None, meta: FieldMeta::default() })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field { values: vec![T::ZERO; grid.len()], grid: grid.clone(), mask: None, meta: FieldMeta::default() }
    }

    /// Sample `f` at every grid point. The closure receives `[x, y]`
    /// (`y = 0` in one dimension).
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field { grid: grid.clone(), values, mask: None, meta: FieldMeta::default() }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.meta.label = Some(label.to_string());
        self
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.meta.time = Some(t);
        self
    }

    pub fn with_mask(mut self, mask: Option<Vec<bool>>) -> Self {
        debug_assert!(mask.as_ref().is_none_or(|m| m.len() == self.values.len()));
        self.mask = mask;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[i])
    }

    /// Rejects the field if any sample is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite_sample()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            mask: self.mask.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Pointwise combination; the masks are merged.
    pub fn zip_with<U: Sample, V: Sample>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Result<Field<V>> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field {
            grid: self.grid.clone(),
            values,
            mask: merge_masks(self.mask(), other.mask()),
            meta: FieldMeta {
                low_accuracy_margin: self.meta.low_accuracy_margin.max(other.meta.low_accuracy_margin),
                ..FieldMeta::default()
            },
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.map(|v| v * s);
        out.meta = self.meta.clone();
        out
    }

    /// Linear combination `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.zip_with(other, |x, y| x * a + y * b)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Largest magnitude over cells that are unmasked and at least `margin`
    /// cells from the grid edge.
    pub fn max_magnitude_interior(&self, margin: usize) -> f64 {
        self.interior_indices(margin).map(|i| self.values[i].magnitude()).fold(0.0, f64::max)
    }

    /// Indices at least `margin` cells from every edge and not masked.
    pub fn interior_indices(&self, margin: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&i| self.grid.cells_from_edge(i) >= margin && !self.is_masked(i))
    }
}

impl RealField {
    /// Trapezoid integral over the grid (masked cells included as stored).
    pub fn integral(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.grid.quadrature_weight(i)).sum()
    }

    /// Replace masked cells by `value`.
    pub fn fill_masked(&self, value: f64) -> RealField {
        let mut out = self.clone();
        if let Some(m) = &self.mask {
            for (v, &masked) in out.values.iter_mut().zip(m) {
                if masked {
                    *v = value;
                }
            }
        }
        out
    }
}

impl ComplexField {
    pub fn density(&self) -> RealField {
        let mut out = self.map(|z| z.norm_sqr());
        out.meta.label = Some("P".into());
        out
    }

    /// ∫|ψ|² by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        self.density().integral()
    }

    /// Rescale to unit norm.
    pub fn normalized(&self) -> Result<ComplexField> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("wavefunction has zero or non-finite norm".into()));
        }
        Ok(self.scaled(1.0 / n.sqrt()))
    }

    pub fn conj(&self) -> ComplexField {
        let mut out = self.map(|z| z.conj());
        out.meta = self.meta.clone();
        out
    }
}

pub(crate) fn merge_masks(a: Option<&[bool]>, b: Option<&[bool]>) -> Option<Vec<bool>> {
    match (a, b) {
        (None, None) => None,
        (Some(m), None) | (None, Some(m)) => Some(m.to_vec()),
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(&p, &q)| p || q).collect()),
    }
}

/// Time-ordered sequence of fields on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack<T> {
    grid: Grid,
    times: Vec<f64>,
    fields: Vec<Field<T>>,
}

impl<T: Sample> FieldStack<T> {
    pub fn new(grid: Grid) -> Self {
        FieldStack { grid, times: Vec::new(), fields: Vec::new() }
    }

    pub fn from_parts(times: Vec<f64>, fields: Vec<Field<T>>) -> Result<Self> {
        let grid = fields
            .first()
            .map(|f| f.grid().clone())
            .ok_or_else(|| Error::InvalidArgument("empty field stack".into()))?;
        let mut stack = FieldStack::new(grid);
        if times.len() != fields.len() {
            return Err(Error::InvalidArgument("times and fields differ in length".into()));
        }
        for (t, f) in times.into_iter().zip(fields) {
            stack.push(t, f)?;
        }
        Ok(stack)
    }

    /// Append a sample; times must strictly increase and grids must match.
    pub fn push(&mut self, t: f64, field: Field<T>) -> Result<()> {
        self.grid.check_same(field.grid())?;
        if !t.is_finite() {
            return Err(Error::InvalidArgument("non-finite sample time".into()));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidArgument(format!("time {t} does not follow {last}")));
            }
        }
        self.times.push(t);
        self.fields.push(field.with_time(t));
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field<T>] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, i: usize) -> &Field<T> {
        &self.fields[i]
    }

    pub fn last(&self) -> Option<&Field<T>> {
        self.fields.last()
    }

    /// Index of the sample nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        (0..self.times.len()).min_by(|&a, &b| (self.times[a] - t).abs().total_cmp(&(self.times[b] - t).abs()))
    }

    pub fn map<U: Sample>(&self, f: impl Fn(&Field<T>) -> Field<U>) -> Result<FieldStack<U>> {
        FieldStack::from_parts(self.times.clone(), self.fields.iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nonfinite() {
        let g = Grid::new_1d(0.0, 1.0, 16).unwrap();
        assert!(RealField::new(g.clone(), vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        let f = RealField::new(g, v).unwrap();
        assert!(matches!(f.ensure_finite(), Err(Error::NonFinite { index: 5 })));
    }

    #[test]
    fn trapezoid_integral_of_linear_is_exact() {
        let g = Grid::new_1d(0.0, 2.0, 33).unwrap();
        let f = RealField::from_fn(&g, |p| 3.0 * p[0] + 1.0);
        assert!((f.integral() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn stack_requires_increasing_times() {
        let g = Grid::new_1d(0.0, 1.0, 16).unwrap();
        let mut s = FieldStack::new(g.clone());
        s.push(0.0, RealField::zeros(&g)).unwrap();
        assert!(s.push(0.0, RealField::zeros(&g)).is_err());
        let other = Grid::new_1d(0.0, 2.0, 16).unwrap();
        assert!(s.push(1.0, RealField::zeros(&other)).is_err());
    }
}
