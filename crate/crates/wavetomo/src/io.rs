//! File formats: raw field dumps, boundary-trace files, PGM previews, and
//! the CSV reports.
//!
//! All numeric payloads are little-endian 64-bit floats regardless of the
//! in-memory scalar type, so files written by an `f32` build load into an
//! `f64` build (and vice versa, with rounding).
//!
//! * **Field dump** — `<path>` holds the row-major node values; a text
//!   sidecar `<path>.hdr` holds `nx ny x_min x_max y_min y_max`.
//! * **Boundary trace** — a single file: text header line `dt nt n_nodes`,
//!   then `n_nodes` lines of node coordinates `x y`, then the `nt × n_nodes`
//!   binary block, one row per time sample.
//! * **PGM preview** — binary P5, maxval 255, linear map of `[min, max]` to
//!   `[0, 255]`; the map endpoints go to the sidecar `<path>.range`. Image
//!   rows run top-down, so row 0 is the `y_max` edge.
//! * **Convergence CSV** — header `n,rel_l2,rel_hd,rel_linf,ratio`.
//! * **Visibility CSV** — header `x,y,theta,class,p,kappa,n_reflections`,
//!   plus a JSON-like summary block from [`visibility_summary`].
//!
//! Writers are deterministic: identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::grid::{Grid2D, ScalarField};
use crate::ray::VisibilityReport;
use crate::region::GammaSpec;
use crate::series::ConvergenceLog;
use crate::wave::BoundaryTrace;

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(ext);
    path.with_file_name(name)
}

/// Path of the text header accompanying a field dump.
pub fn field_header_path(path: &Path) -> PathBuf {
    sidecar(path, ".hdr")
}

/// Path of the value-range sidecar accompanying a PGM preview.
pub fn pgm_range_path(path: &Path) -> PathBuf {
    sidecar(path, ".range")
}

/// Writes a field as raw little-endian f64 values plus its header sidecar.
pub fn save_field<T: Float>(field: &ScalarField<T>, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut out = BufWriter::new(File::create(path)?);
    for &v in field.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    let header = format!(
        "{} {} {:?} {:?} {:?} {:?}\n",
        g.nx,
        g.ny,
        g.x_min.as_f64(),
        g.x_max.as_f64(),
        g.y_min.as_f64(),
        g.y_max.as_f64()
    );
    std::fs::write(field_header_path(path), header)?;
    Ok(())
}

/// Loads a field dump written by [`save_field`].
pub fn load_field<T: Float>(path: &Path) -> Result<ScalarField<T>> {
    let header = std::fs::read_to_string(field_header_path(path))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 {
        return Err(Error::Parse(format!(
            "field header needs 6 values `nx ny x_min x_max y_min y_max`, got {}",
            tok.len()
        )));
    }
    let dim = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse(format!("bad node count {s:?} in field header")))
    };
    let num = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Parse(format!("bad extent {s:?} in field header")))
    };
    let (nx, ny) = (dim(tok[0])?, dim(tok[1])?);
    let grid = Grid2D::new(
        nx,
        ny,
        T::cast(num(tok[2])?),
        T::cast(num(tok[3])?),
        T::cast(num(tok[4])?),
        T::cast(num(tok[5])?),
    )?;
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    if raw.len() != 8 * nx * ny {
        return Err(Error::Parse(format!(
            "field dump holds {} bytes, header promises {}",
            raw.len(),
            8 * nx * ny
        )));
    }
    let values = raw
        .chunks_exact(8)
        .map(|b| T::cast(f64::from_le_bytes(b.try_into().expect("eight bytes"))))
        .collect();
    ScalarField::from_values(grid, values)
}

/// Writes a boundary trace: header `dt nt n_nodes`, the node coordinate
/// table, then the sample block. Storing the step (rather than the duration)
/// keeps file round trips bit-exact: `{:?}` prints the shortest string that
/// parses back to the same float.
pub fn save_trace<T: Float>(trace: &BoundaryTrace<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let nt = trace.n_samples();
    writeln!(out, "{:?} {} {}", trace.dt().as_f64(), nt, trace.n_nodes())?;
    let g = trace.grid();
    for &(i, j) in trace.nodes() {
        let (x, y) = g.pos(i, j);
        writeln!(out, "{:?} {:?}", x.as_f64(), y.as_f64())?;
    }
    for k in 0..nt {
        for &v in trace.sample(k) {
            out.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Loads a trace written by [`save_trace`], validating that its node table
/// matches the boundary subset `gamma` selects on `grid`.
pub fn load_trace<T: Float>(
    path: &Path,
    grid: &Grid2D<T>,
    gamma: &GammaSpec<T>,
) -> Result<BoundaryTrace<T>> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.len() != 3 {
        return Err(Error::Parse("trace header must be `dt nt n_nodes`".into()));
    }
    let dt: f64 =
        tok[0].parse().map_err(|_| Error::Parse(format!("bad time step {:?}", tok[0])))?;
    let nt: usize =
        tok[1].parse().map_err(|_| Error::Parse(format!("bad sample count {:?}", tok[1])))?;
    let n_nodes: usize =
        tok[2].parse().map_err(|_| Error::Parse(format!("bad node count {:?}", tok[2])))?;
    if nt < 2 || n_nodes == 0 || !(dt > 0.0) {
        return Err(Error::Parse(format!(
            "trace header out of range: dt = {dt}, nt = {nt}, n_nodes = {n_nodes}"
        )));
    }

    let expected = gamma.boundary_nodes(grid);
    if expected.len() != n_nodes {
        return Err(Error::TraceMismatch(format!(
            "file holds {n_nodes} boundary nodes, the boundary subset selects {}",
            expected.len()
        )));
    }
    let tol = 1e-9 * grid.min_h().as_f64();
    for &(i, j) in &expected {
        line.clear();
        reader.read_line(&mut line)?;
        let mut it = line.split_whitespace();
        let (xs, ys) = match (it.next(), it.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse("truncated node coordinate table".into())),
        };
        let x: f64 = xs.parse().map_err(|_| Error::Parse(format!("bad coordinate {xs:?}")))?;
        let y: f64 = ys.parse().map_err(|_| Error::Parse(format!("bad coordinate {ys:?}")))?;
        let (gx, gy) = grid.pos(i, j);
        if (x - gx.as_f64()).abs() > tol || (y - gy.as_f64()).abs() > tol {
            return Err(Error::TraceMismatch(format!(
                "trace node at ({x}, {y}) does not match grid node ({}, {})",
                gx.as_f64(),
                gy.as_f64()
            )));
        }
    }

    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    if raw.len() != 8 * nt * n_nodes {
        return Err(Error::Parse(format!(
            "trace block holds {} bytes, header promises {}",
            raw.len(),
            8 * nt * n_nodes
        )));
    }
    let values: Vec<T> = raw
        .chunks_exact(8)
        .map(|b| T::cast(f64::from_le_bytes(b.try_into().expect("eight bytes"))))
        .collect();
    BoundaryTrace::from_values(*grid, gamma.clone(), T::cast(dt), nt, values)
}

/// Writes a binary P5 PGM preview with a linear `[min, max] → [0, 255]` gray
/// map; the endpoints go to the `.range` sidecar. A constant field maps to
/// all-zero gray.
pub fn save_pgm<T: Float>(field: &ScalarField<T>, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in field.values() {
        let v = v.as_f64();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", g.nx, g.ny)?;
    let mut row = vec![0u8; g.nx];
    for j in (0..g.ny).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            let v = field.at(i, j).as_f64();
            *px = if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    std::fs::write(pgm_range_path(path), format!("{lo:?} {hi:?}\n"))?;
    Ok(())
}

fn csv_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.12e}")
    }
}

/// Writes a convergence log as `n,rel_l2,rel_hd,rel_linf,ratio` CSV.
pub fn save_convergence_csv<T: Float>(log: &ConvergenceLog<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "n,rel_l2,rel_hd,rel_linf,ratio")?;
    for r in log.rows() {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            csv_float(r.rel_l2.as_f64()),
            csv_float(r.rel_hd.as_f64()),
            csv_float(r.rel_linf.as_f64()),
            csv_float(r.ratio.as_f64())
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a visibility census as `x,y,theta,class,p,kappa,n_reflections`
/// CSV, one row per sampled phase-space point.
pub fn save_visibility_csv<T: Float>(report: &VisibilityReport<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x,y,theta,class,p,kappa,n_reflections")?;
    for s in &report.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_float(s.x.as_f64()),
            csv_float(s.y.as_f64()),
            csv_float(s.theta.as_f64()),
            s.class.label(),
            csv_float(s.p.as_f64()),
            csv_float(s.kappa.as_f64()),
            s.n_reflections
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Renders the census counts and verdict as a small JSON-like block.
pub fn visibility_summary<T: Float>(report: &VisibilityReport<T>) -> String {
    format!(
        "{{\n  \"samples\": {},\n  \"visible\": {},\n  \"invisible\": {},\n  \"borderline\": {},\n  \"min_p_visible\": {},\n  \"stable\": {}\n}}\n",
        report.samples.len(),
        report.visible,
        report.invisible,
        report.borderline,
        csv_float(report.min_p_visible.as_f64()),
        report.stable
    )
}
