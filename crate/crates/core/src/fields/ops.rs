//! Finite-difference operators on uniform grids.
//!
//! Interior cells use central second-order stencils; edge cells use
//! one-sided second-order stencils.

use num_complex::Complex64;

use super::field::{ComplexField, Field, FieldStack, RealField, Sample};
use crate::error::{Error, Result};

/// Default number of edge cells excluded from residual checks.
pub const DEFAULT_BOUNDARY_MARGIN: usize = 3;

fn first_derivative_line<T: Sample>(line: &[T], h: f64, out: &mut [T]) {
    let n = line.len();
    let inv2h = 0.5 / h;
    out[0] = (line[1] * 4.0 - line[0] * 3.0 - line[2]) * inv2h;
    for i in 1..n - 1 {
        out[i] = (line[i + 1] - line[i - 1]) * inv2h;
    }
    out[n - 1] = (line[n - 1] * 3.0 - line[n - 2] * 4.0 + line[n - 3]) * inv2h;
}

fn second_derivative_line<T: Sample>(line: &[T], h: f64, out: &mut [T]) {
    let n = line.len();
    let inv_h2 = 1.0 / (h * h);
    out[0] = (line[0] * 2.0 - line[1] * 5.0 + line[2] * 4.0 - line[3]) * inv_h2;
    for i in 1..n - 1 {
        out[i] = (line[i + 1] - line[i] * 2.0 + line[i - 1]) * inv_h2;
    }
    out[n - 1] = (line[n - 1] * 2.0 - line[n - 2] * 5.0 + line[n - 3] * 4.0 - line[n - 4]) * inv_h2;
}

/// Apply a 1D line operator along `axis`, accumulating into `acc`.
fn apply_along<T: Sample>(f: &Field<T>, axis: usize, acc: &mut [T], op: fn(&[T], f64, &mut [T])) {
    let grid = f.grid();
    let (lines, len, stride) = grid.lines(axis);
    let h = grid.spacing(axis);
    let mut buf = vec![T::ZERO; len];
    let mut out = vec![T::ZERO; len];
    for l in 0..lines {
        let start = grid.line_start(axis, l);
        for (k, b) in buf.iter_mut().enumerate() {
            *b = f.values()[start + k * stride];
        }
        op(&buf, h, &mut out);
        for (k, o) in out.iter().enumerate() {
            let idx = start + k * stride;
            acc[idx] = acc[idx] + *o;
        }
    }
}

fn derived<T: Sample>(src: &Field<T>, values: Vec<T>, margin: usize) -> Field<T> {
    let mut out =
        Field::new(src.grid().clone(), values).expect("same grid").with_mask(src.mask().map(<[bool]>::to_vec));
    out.meta.time = src.meta.time;
    out.meta.low_accuracy_margin = margin.max(src.meta.low_accuracy_margin);
    out
}

/// Partial derivative along one axis.
pub fn partial<T: Sample>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    f.ensure_finite()?;
    let mut acc = vec![T::ZERO; f.len()];
    apply_along(f, axis, &mut acc, first_derivative_line);
    Ok(derived(f, acc, 0))
}

/// Gradient: one component field per axis.
pub fn gradient<T: Sample>(f: &Field<T>) -> Result<Vec<Field<T>>> {
    (0..f.grid().dim()).map(|a| partial(f, a)).collect()
}

/// Second partial derivative along one axis.
pub fn second_partial<T: Sample>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    f.ensure_finite()?;
    let mut acc = vec![T::ZERO; f.len()];
    apply_along(f, axis, &mut acc, second_derivative_line);
    Ok(derived(f, acc, 1))
}

/// 3-point (1D) or 5-point (2D) Laplacian. The outermost row is flagged
/// as low accuracy in the metadata.
pub fn laplacian<T: Sample>(f: &Field<T>) -> Result<Field<T>> {
    f.ensure_finite()?;
    let mut acc = vec![T::ZERO; f.len()];
    for a in 0..f.grid().dim() {
        apply_along(f, a, &mut acc, second_derivative_line);
    }
    Ok(derived(f, acc, 1))
}

/// Divergence of a vector field given as one component per axis.
pub fn divergence<T: Sample>(components: &[Field<T>]) -> Result<Field<T>> {
    let first = components.first().ok_or_else(|| Error::InvalidArgument("empty vector field".into()))?;
    if components.len() != first.grid().dim() {
        return Err(Error::InvalidArgument(format!(
            "{} components for a {}-dimensional grid",
            components.len(),
            first.grid().dim()
        )));
    }
    let mut acc = vec![T::ZERO; first.len()];
    for (a, c) in components.iter().enumerate() {
        first.grid().check_same(c.grid())?;
        c.ensure_finite()?;
        apply_along(c, a, &mut acc, first_derivative_line);
    }
    Ok(derived(first, acc, 0))
}

/// Gradient of the phase of `psi`, built from phase increments between
/// neighbouring samples so no global unwrapping is needed. Equals
/// `Im(∇ψ/ψ)` for smooth nonvanishing ψ.
pub fn phase_gradient(psi: &ComplexField) -> Result<Vec<RealField>> {
    psi.ensure_finite()?;
    let grid = psi.grid();
    let mut comps = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let (lines, len, stride) = grid.lines(axis);
        let h = grid.spacing(axis);
        let mut acc = vec![0.0; psi.len()];
        let v = psi.values();
        let inc = |a: Complex64, b: Complex64| (a * b.conj()).arg();
        for l in 0..lines {
            let start = grid.line_start(axis, l);
            let at = |k: usize| v[start + k * stride];
            let d1 = inc(at(1), at(0));
            let d2 = inc(at(2), at(1));
            acc[start] = (3.0 * d1 - d2) / (2.0 * h);
            for k in 1..len - 1 {
                acc[start + k * stride] = inc(at(k + 1), at(k - 1)) / (2.0 * h);
            }
            let e1 = inc(at(len - 1), at(len - 2));
            let e2 = inc(at(len - 2), at(len - 3));
            acc[start + (len - 1) * stride] = (3.0 * e1 - e2) / (2.0 * h);
        }
        let mut f = RealField::new(grid.clone(), acc)?;
        f.meta.time = psi.meta.time;
        comps.push(f);
    }
    Ok(comps)
}

/// Cells on either side of a neighbour-to-neighbour phase jump larger than
/// π/2 along any axis. Such jumps mark a zero of ψ between samples (a sign
/// flip for real ψ), where the phase gradient is undefined.
pub fn phase_slips(psi: &ComplexField) -> Vec<bool> {
    let grid = psi.grid();
    let v = psi.values();
    let mut out = vec![false; psi.len()];
    for axis in 0..grid.dim() {
        let (lines, len, stride) = grid.lines(axis);
        for l in 0..lines {
            let start = grid.line_start(axis, l);
            for k in 0..len - 1 {
                let (a, b) = (start + k * stride, start + (k + 1) * stride);
                if (v[b] * v[a].conj()).arg().abs() > std::f64::consts::FRAC_PI_2 {
                    out[a] = true;
                    out[b] = true;
                }
            }
        }
    }
    out
}

/// Time derivative of a stack at sample `index`: second-order central
/// where both neighbours exist, second-order one-sided at the ends, and a
/// plain difference for two-sample stacks. Handles non-uniform spacing.
pub fn time_derivative<T: Sample>(stack: &FieldStack<T>, index: usize) -> Result<Field<T>> {
    let n = stack.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("time derivative needs ≥ 2 samples, stack has {n}")));
    }
    if index >= n {
        return Err(Error::InvalidArgument(format!("index {index} out of range for {n} samples")));
    }
    let t = stack.times();
    let f = |i: usize| stack.get(i).values();
    let (idx, w): ([usize; 3], [f64; 3]) = if n == 2 {
        let d = t[1] - t[0];
        ([0, 1, 1], [-1.0 / d, 1.0 / d, 0.0])
    } else if index == 0 {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        ([0, 1, 2], [-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))])
    } else if index == n - 1 {
        let (a, b) = (t[n - 1] - t[n - 2], t[n - 2] - t[n - 3]);
        ([n - 1, n - 2, n - 3], [(2.0 * a + b) / (a * (a + b)), -(a + b) / (a * b), a / (b * (a + b))])
    } else {
        let (h1, h2) = (t[index] - t[index - 1], t[index + 1] - t[index]);
        ([index - 1, index, index + 1], [-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))])
    };
    let values =
        (0..stack.grid().len()).map(|k| f(idx[0])[k] * w[0] + f(idx[1])[k] * w[1] + f(idx[2])[k] * w[2]).collect();
    let src = stack.get(index);
    let mut out = Field::new(stack.grid().clone(), values)?.with_mask(src.mask().map(<[bool]>::to_vec));
    out.meta.time = Some(t[index]);
    out.ensure_finite()?;
    Ok(out)
}
