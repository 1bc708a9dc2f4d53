//! Trajectory CSV: `# trajectories count=<n> scheme=<s> dt=<dt>` followed by
//! rows `t, x_1..x_n, v_1..v_n`; invalid samples are written as the sentinel.

use std::io::{BufRead, Write};

use super::integrate::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::fields::io::{fmt_f64, SENTINEL};

pub fn write_trajectories<W: Write + ?Sized>(w: &mut W, ens: &TrajectoryEnsemble) -> Result<()> {
    writeln!(w, "# trajectories count={} scheme={} dt={}", ens.len(), ens.scheme.name(), fmt_f64(ens.dt))?;
    for (k, &t) in ens.times.iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        for j in 0..ens.len() {
            row.push(fmt_f64(if ens.valid(j, k) { ens.positions[j][k] } else { SENTINEL }));
        }
        for j in 0..ens.len() {
            row.push(fmt_f64(if ens.valid(j, k) { ens.velocities[j][k] } else { SENTINEL }));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parsed trajectory table: times, positions[j][k], velocities[j][k]
/// (sentinel values are kept as written).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub count: usize,
    pub scheme: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

pub fn read_trajectories<R: BufRead>(r: R) -> Result<TrajectoryTable> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty trajectory file".into()))??;
    let rest = header
        .strip_prefix("# trajectories ")
        .ok_or_else(|| Error::Parse(format!("bad trajectory header: {header}")))?;
    let (mut count, mut scheme, mut dt) = (None, None, None);
    for kv in rest.split_whitespace() {
        match kv.split_once('=') {
            Some(("count", v)) => count = v.parse::<usize>().ok(),
            Some(("scheme", v)) => scheme = Some(v.to_string()),
            Some(("dt", v)) => dt = v.parse::<f64>().ok(),
            _ => return Err(Error::Parse(format!("unknown header field {kv}"))),
        }
    }
    let (count, scheme, dt) = match (count, scheme, dt) {
        (Some(c), Some(s), Some(d)) => (c, s, d),
        _ => return Err(Error::Parse(format!("incomplete trajectory header: {header}"))),
    };
    let mut times = Vec::new();
    let mut positions = vec![Vec::new(); count];
    let mut velocities = vec![Vec::new(); count];
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        if vals.len() != 1 + 2 * count {
            return Err(Error::Parse(format!(
                "line {}: expected {} columns, got {}",
                ln + 2,
                1 + 2 * count,
                vals.len()
            )));
        }
        times.push(vals[0]);
        for j in 0..count {
            positions[j].push(vals[1 + j]);
            velocities[j].push(vals[1 + count + j]);
        }
    }
    Ok(TrajectoryTable { count, scheme, dt, times, positions, velocities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohmian::{Interpolation, SeedMethod};

    #[test]
    fn round_trip_with_sentinel() {
        let ens = TrajectoryEnsemble {
            seeds: vec![0.0, 1.0],
            method: SeedMethod::Quantile,
            times: vec![0.0, 0.5, 1.0],
            positions: vec![vec![0.0, 0.1, 0.2], vec![1.0, 1.1, 1.1]],
            velocities: vec![vec![0.2, 0.2, 0.2], vec![0.2, 0.0, 0.0]],
            incomplete_from: vec![None, Some(1)],
            events: vec![],
            scheme: Interpolation::Linear,
            dt: 0.5,
        };
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &ens).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# trajectories count=2 scheme=rk4-linear dt=5.0000000000000000e-1\n"));
        let t = read_trajectories(&buf[..]).unwrap();
        assert_eq!(t.times, ens.times);
        assert_eq!(t.positions[0], ens.positions[0]);
        assert_eq!(t.positions[1], vec![1.0, SENTINEL, SENTINEL]);
        assert!(read_trajectories(&b"# nope\n"[..]).is_err());
    }
}
