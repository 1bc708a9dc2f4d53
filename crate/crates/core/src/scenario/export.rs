//! Flattened, long-format copies of a result directory for plotting tools.
//!
//! Everything goes to `<result-dir>/plot-data/` with its own manifest; the
//! result directory's files and manifest are only read.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::json::to_json_string;
use super::manifest::{sha256_hex, Manifest, ManifestEntry, MANIFEST_FILE, TOOL_NAME, TOOL_VERSION};
use super::run::{
    StripeExport, DENSITY_FILE, EXTERNAL_POTENTIAL_FILE, HEAT_FILE, POTENTIAL_FILE, STRIPES_FILE, TRAJECTORY_FILE,
};
use crate::bohmian::io::read_trajectories;
use crate::error::{Error, Result};
use crate::fields::io::{fmt_f64, read_field, read_stack, SENTINEL};
use crate::fields::{FieldStack, RealField};

pub const PLOT_DIR: &str = "plot-data";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// Hash of the source result's manifest file.
    pub source_manifest_sha256: String,
    /// Value standing for masked samples in every column.
    pub sentinel: f64,
    pub files: Vec<ManifestEntry>,
}

fn write_file(
    dir: &Path,
    rel: &str,
    files: &mut Vec<ManifestEntry>,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let path = dir.join(rel);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    drop(w);
    let bytes = fs::read(&path)?;
    files.push(ManifestEntry { path: rel.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
    Ok(())
}

fn flatten_stack(w: &mut dyn Write, s: &FieldStack<f64>) -> Result<()> {
    let g = s.grid();
    if g.dim() == 1 {
        writeln!(w, "t,x,value")?;
    } else {
        writeln!(w, "t,x,y,value")?;
    }
    for (t, f) in s.times().iter().zip(s.fields()) {
        let t = fmt_f64(*t);
        for i in 0..g.len() {
            let p = g.point(i);
            let v = fmt_f64(f.values()[i]);
            if g.dim() == 1 {
                writeln!(w, "{t},{},{v}", fmt_f64(p[0]))?;
            } else {
                writeln!(w, "{t},{},{},{v}", fmt_f64(p[0]), fmt_f64(p[1]))?;
            }
        }
    }
    Ok(())
}

fn flatten_field(w: &mut dyn Write, f: &RealField) -> Result<()> {
    let g = f.grid();
    writeln!(w, "{}", if g.dim() == 1 { "x,value" } else { "x,y,value" })?;
    for i in 0..g.len() {
        let p = g.point(i);
        let v = fmt_f64(f.values()[i]);
        if g.dim() == 1 {
            writeln!(w, "{},{v}", fmt_f64(p[0]))?;
        } else {
            writeln!(w, "{},{},{v}", fmt_f64(p[0]), fmt_f64(p[1]))?;
        }
    }
    Ok(())
}

fn open(dir: &Path, rel: &str) -> Result<BufReader<File>> {
    File::open(dir.join(rel)).map(BufReader::new).map_err(|e| Error::Parse(format!("{}: {e}", dir.join(rel).display())))
}

fn with_file<T>(rel: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Parse(format!("{rel}: {e}")))
}

/// Flatten the stacks, trajectories and stripes of `result_dir`. The source
/// manifest must match the files on disk.
pub fn export_plots_data(result_dir: &Path) -> Result<PathBuf> {
    let manifest = Manifest::load(result_dir)?;
    let stale = manifest.mismatches(result_dir);
    if !stale.is_empty() {
        return Err(Error::Parse(format!("files differ from the manifest: {}", stale.join(", "))));
    }
    let out = result_dir.join(PLOT_DIR);
    fs::create_dir_all(&out)?;
    let mut files = Vec::new();

    for (src, dst) in
        [(DENSITY_FILE, "density_long.csv"), (POTENTIAL_FILE, "potential_long.csv"), (HEAT_FILE, "heat_long.csv")]
    {
        if manifest.get(src).is_some() {
            let s: FieldStack<f64> = with_file(src, read_stack(open(result_dir, src)?))?;
            write_file(&out, dst, &mut files, |w| flatten_stack(w, &s))?;
        }
    }
    if manifest.get(EXTERNAL_POTENTIAL_FILE).is_some() {
        let f: RealField = with_file(EXTERNAL_POTENTIAL_FILE, read_field(open(result_dir, EXTERNAL_POTENTIAL_FILE)?))?;
        write_file(&out, "external_potential_long.csv", &mut files, |w| flatten_field(w, &f))?;
    }

    // always present so consumers can tell "no trajectories" from a broken export
    let table = if manifest.get(TRAJECTORY_FILE).is_some() {
        Some(with_file(TRAJECTORY_FILE, read_trajectories(open(result_dir, TRAJECTORY_FILE)?))?)
    } else {
        None
    };
    write_file(&out, "trajectories_long.csv", &mut files, |w| {
        writeln!(w, "trajectory,t,x,v")?;
        if let Some(t) = &table {
            for j in 0..t.count {
                for (k, time) in t.times.iter().enumerate() {
                    let (x, v) = (t.positions[j][k], t.velocities[j][k]);
                    if x != SENTINEL {
                        writeln!(w, "{j},{},{},{}", fmt_f64(*time), fmt_f64(x), fmt_f64(v))?;
                    }
                }
            }
        }
        Ok(())
    })?;

    if manifest.get(STRIPES_FILE).is_some() {
        let text = fs::read_to_string(result_dir.join(STRIPES_FILE))?;
        let st: StripeExport = with_file(STRIPES_FILE, serde_json::from_str(&text).map_err(Error::from))?;
        write_file(&out, "stripes_long.csv", &mut files, |w| {
            writeln!(w, "t,position,value,kind,scored")?;
            for (k, fr) in st.report.frames.iter().enumerate() {
                for e in &fr.extrema {
                    let kind = serde_json::to_value(e.kind)?;
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        fmt_f64(fr.time),
                        fmt_f64(e.position),
                        fmt_f64(e.value),
                        kind.as_str().unwrap_or("?"),
                        u8::from(k == st.scored.frame)
                    )?;
                }
            }
            Ok(())
        })?;
    }

    files.sort_by(|a, b| a.path.cmp(&b.path));
    let pm = PlotManifest {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        scenario: manifest.scenario.clone(),
        source_manifest_sha256: sha256_hex(&fs::read(result_dir.join(MANIFEST_FILE))?),
        sentinel: SENTINEL,
        files,
    };
    fs::write(out.join(MANIFEST_FILE), to_json_string(&pm)?)?;
    Ok(out)
}
