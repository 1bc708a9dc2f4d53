//! Text serialization of fields and field stacks.
//!
//! ```text
//! # grid: dim=1 axis0=<min>,<max>,<n> quantity=<label> time=<t>
//! 0,<re>[,<im>]
//! 1,<re>[,<im>]
//! ```
//!
//! Two-dimensional fields carry `axis1=...` in the header and two index
//! columns. Numbers are written with 17 significant digits so every value
//! round-trips bit-exactly. Masked cells are written as [`SENTINEL`].
//! A stack is a concatenation of such blocks, one per time sample.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::field::{Field, FieldStack, Sample};
use super::grid::{Axis, Grid};
use crate::error::{Error, Result};

/// Value written in place of masked (undefined) samples.
pub const SENTINEL: f64 = -1.0e300;

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A sample type with a CSV column representation.
pub trait CsvSample: Sample {
    const COLUMNS: usize;
    fn write_columns(&self, out: &mut String);
    fn from_columns(cols: &[f64]) -> Self;
    fn sentinel() -> Self;
    fn is_sentinel(&self) -> bool;
}

impl CsvSample for f64 {
    const COLUMNS: usize = 1;
    fn write_columns(&self, out: &mut String) {
        out.push_str(&fmt_f64(*self));
    }
    fn from_columns(cols: &[f64]) -> Self {
        cols[0]
    }
    fn sentinel() -> Self {
        SENTINEL
    }
    fn is_sentinel(&self) -> bool {
        *self == SENTINEL
    }
}

impl CsvSample for Complex64 {
    const COLUMNS: usize = 2;
    fn write_columns(&self, out: &mut String) {
        out.push_str(&fmt_f64(self.re));
        out.push(',');
        out.push_str(&fmt_f64(self.im));
    }
    fn from_columns(cols: &[f64]) -> Self {
        Complex64::new(cols[0], cols[1])
    }
    fn sentinel() -> Self {
        Complex64::new(SENTINEL, SENTINEL)
    }
    fn is_sentinel(&self) -> bool {
        self.re == SENTINEL && self.im == SENTINEL
    }
}

fn header(grid: &Grid, label: &str, time: f64) -> String {
    let mut h = format!("# grid: dim={}", grid.dim());
    for (i, a) in grid.axes().iter().enumerate() {
        h.push_str(&format!(" axis{i}={},{},{}", fmt_f64(a.min), fmt_f64(a.max), a.points));
    }
    h.push_str(&format!(" quantity={label} time={}", fmt_f64(time)));
    h
}

pub fn write_field<T: CsvSample, W: Write + ?Sized>(w: &mut W, field: &Field<T>) -> Result<()> {
    let grid = field.grid();
    let label = field.meta.label.as_deref().unwrap_or("none");
    writeln!(w, "{}", header(grid, label, field.meta.time.unwrap_or(0.0)))?;
    let mut line = String::with_capacity(64);
    for (i, v) in field.values().iter().enumerate() {
        line.clear();
        let [ix, iy] = grid.unravel(i);
        line.push_str(&ix.to_string());
        if grid.dim() == 2 {
            line.push(',');
            line.push_str(&iy.to_string());
        }
        line.push(',');
        let v = if field.is_masked(i) { T::sentinel() } else { *v };
        v.write_columns(&mut line);
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_stack<T: CsvSample, W: Write + ?Sized>(w: &mut W, stack: &FieldStack<T>) -> Result<()> {
    for f in stack.fields() {
        write_field(w, f)?;
    }
    Ok(())
}

struct Header {
    grid: Grid,
    label: String,
    time: f64,
}

fn parse_header(line: &str) -> Result<Header> {
    let rest = line
        .strip_prefix("# grid:")
        .ok_or_else(|| Error::Parse(format!("expected `# grid:` header, found `{line}`")))?;
    let mut dim = None;
    let mut axes: Vec<(usize, Axis)> = Vec::new();
    let mut label = None;
    let mut time = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("dim: {e}")))?),
            "quantity" => label = Some(v.to_string()),
            "time" => time = Some(parse_f64(v)?),
            _ if k.starts_with("axis") => {
                let i: usize = k[4..].parse().map_err(|e| Error::Parse(format!("{k}: {e}")))?;
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("{k} needs min,max,n")));
                }
                let n = parts[2].parse().map_err(|e| Error::Parse(format!("{k} n: {e}")))?;
                axes.push((i, Axis::new(parse_f64(parts[0])?, parse_f64(parts[1])?, n)?));
            }
            _ => return Err(Error::Parse(format!("unknown header key `{k}`"))),
        }
    }
    axes.sort_by_key(|(i, _)| *i);
    let grid = Grid::new(axes.into_iter().map(|(_, a)| a).collect())?;
    if dim != Some(grid.dim()) {
        return Err(Error::Parse("dim does not match axis count".into()));
    }
    Ok(Header {
        grid,
        label: label.ok_or_else(|| Error::Parse("missing quantity".into()))?,
        time: time.ok_or_else(|| Error::Parse("missing time".into()))?,
    })
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

/// Read every block of a field/stack file.
pub fn read_fields<T: CsvSample, R: BufRead>(r: R) -> Result<Vec<Field<T>>> {
    let mut out = Vec::new();
    let mut current: Option<(Header, Vec<T>, Vec<bool>)> = None;
    let finish = |cur: (Header, Vec<T>, Vec<bool>)| -> Result<Field<T>> {
        let (h, vals, mask) = cur;
        let any = mask.iter().any(|&m| m);
        let mut f = Field::new(h.grid, vals)?.with_mask(any.then_some(mask));
        f.meta.label = (h.label != "none").then_some(h.label);
        f.meta.time = Some(h.time);
        Ok(f)
    };
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(cur) = current.take() {
                out.push(finish(cur)?);
            }
            let h = parse_header(&line)?;
            let n = h.grid.len();
            current = Some((h, Vec::with_capacity(n), Vec::with_capacity(n)));
            continue;
        }
        let (h, vals, mask) =
            current.as_mut().ok_or_else(|| Error::Parse(format!("line {}: data before header", lineno + 1)))?;
        let cols: Vec<&str> = line.split(',').collect();
        let nidx = h.grid.dim();
        if cols.len() != nidx + T::COLUMNS {
            return Err(Error::Parse(format!(
                "line {}: expected {} columns, found {}",
                lineno + 1,
                nidx + T::COLUMNS,
                cols.len()
            )));
        }
        let nums = cols[nidx..].iter().map(|c| parse_f64(c)).collect::<Result<Vec<_>>>()?;
        let v = T::from_columns(&nums);
        mask.push(v.is_sentinel());
        vals.push(v);
    }
    if let Some(cur) = current.take() {
        out.push(finish(cur)?);
    }
    Ok(out)
}

pub fn read_field<T: CsvSample, R: BufRead>(r: R) -> Result<Field<T>> {
    let mut v = read_fields(r)?;
    if v.len() != 1 {
        return Err(Error::Parse(format!("expected one field block, found {}", v.len())));
    }
    Ok(v.remove(0))
}

pub fn read_stack<T: CsvSample, R: BufRead>(r: R) -> Result<FieldStack<T>> {
    let fields = read_fields(r)?;
    let times = fields.iter().map(|f| f.meta.time.unwrap_or(0.0)).collect();
    FieldStack::from_parts(times, fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ComplexField, RealField};
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new_2d((0.0, 1.0, 8), (-1.0, 1.0, 9)).unwrap();
        let f = RealField::zeros(&g).with_label("U").with_time(0.5);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            "# grid: dim=2 axis0=0.0000000000000000e0,1.0000000000000000e0,8 \
             axis1=-1.0000000000000000e0,1.0000000000000000e0,9 quantity=U time=5.0000000000000000e-1"
        );
        assert_eq!(text.lines().nth(2).unwrap(), "0,1,0.0000000000000000e0");
    }

    #[test]
    fn masked_cells_use_sentinel() {
        let g = Grid::new_1d(0.0, 1.0, 8).unwrap();
        let mut mask = vec![false; 8];
        mask[3] = true;
        let f = RealField::from_fn(&g, |p| p[0]).with_mask(Some(mask.clone()));
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(!text.contains("NaN"));
        let back: RealField = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.mask().unwrap(), mask.as_slice());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_field::<f64, _>("0,1.0\n".as_bytes()).is_err());
        assert!(read_field::<f64, _>("# grid: dim=1 axis0=0,1,8 quantity=P time=0\n0,1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn complex_roundtrip_is_bit_exact(vals in proptest::collection::vec((-1e6f64..1e6, -1e-6f64..1e-6), 8..40), t in -10.0f64..10.0) {
            let g = Grid::new_1d(-1.234567890123, 9.87654321, vals.len()).unwrap();
            let f = ComplexField::new(g, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
                .with_label("psi").with_time(t);
            let mut buf = Vec::new();
            write_field(&mut buf, &f).unwrap();
            let back: ComplexField = read_field(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn real_stack_roundtrip(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite() && *v != SENTINEL), 24)) {
            let g = Grid::new_1d(0.0, 1.0, 8).unwrap();
            let mut s = FieldStack::new(g.clone());
            for (k, chunk) in vals.chunks(8).enumerate() {
                s.push(k as f64 * 0.1, RealField::new(g.clone(), chunk.to_vec()).unwrap().with_label("Q")).unwrap();
            }
            let mut buf = Vec::new();
            write_stack(&mut buf, &s).unwrap();
            let back: FieldStack<f64> = read_stack(buf.as_slice()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
