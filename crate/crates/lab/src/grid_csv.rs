//! Node-value tables: one row `i,j,x,y,value` per active node.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use epstein_core::calculus::{Field, GridChart, ScalarField, SymTensor2Field};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ScalarRow {
    i: usize,
    j: usize,
    x: f64,
    y: f64,
    value: f64,
}

#[derive(Debug, Serialize)]
struct TensorRow {
    i: usize,
    j: usize,
    x: f64,
    y: f64,
    xx: f64,
    xy: f64,
    yy: f64,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> LabError + '_ {
    move |source| LabError::Csv { path: path.to_path_buf(), source }
}

pub fn write_scalar(path: &Path, f: &ScalarField) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let chart = f.chart();
    for n in chart.active_nodes() {
        let (i, j) = chart.ij(n);
        let z = chart.z(n);
        w.serialize(ScalarRow { i, j, x: z.re, y: z.im, value: f.get(n) }).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn write_tensor(path: &Path, t: &SymTensor2Field) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let chart = t.chart();
    for n in chart.active_nodes() {
        let (i, j) = chart.ij(n);
        let z = chart.z(n);
        let s = t.get(n);
        w.serialize(TensorRow { i, j, x: z.re, y: z.im, xx: s.xx, xy: s.xy, yy: s.yy }).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Reads a scalar table back onto a Dirichlet chart whose spacing is
/// inferred from the rows; nodes absent from the table are masked.
pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: ScalarRow = row.map_err(csv_err(path))?;
        rows.push(row);
    }
    let bad = |line: usize, why: &str| LabError::Format { path: path.to_path_buf(), line, why: why.to_string() };
    if rows.is_empty() {
        return Err(bad(1, "table has no rows"));
    }
    let nx = rows.iter().map(|r| r.i).max().unwrap() + 1;
    let ny = rows.iter().map(|r| r.j).max().unwrap() + 1;
    let spacing = |key: fn(&ScalarRow) -> (usize, f64)| -> Option<(f64, f64)> {
        let lo = rows.iter().min_by_key(|r| key(r).0)?;
        let hi = rows.iter().max_by_key(|r| key(r).0)?;
        let (ilo, vlo) = key(lo);
        let (ihi, vhi) = key(hi);
        if ihi == ilo {
            return None;
        }
        let d = (vhi - vlo) / (ihi - ilo) as f64;
        Some((vlo - ilo as f64 * d, d))
    };
    let (x0, dx) = spacing(|r| (r.i, r.x)).ok_or_else(|| bad(1, "need at least two columns of nodes"))?;
    let (y0, dy) = spacing(|r| (r.j, r.y)).ok_or_else(|| bad(1, "need at least two rows of nodes"))?;
    if !(dx > 0.0 && dy > 0.0) {
        return Err(bad(1, "node coordinates must increase with i and j"));
    }
    let mut values = HashMap::new();
    for (k, row) in rows.iter().enumerate() {
        let ex = x0 + row.i as f64 * dx;
        let ey = y0 + row.j as f64 * dy;
        if (row.x - ex).abs() > 1e-9 * (1.0 + ex.abs()) || (row.y - ey).abs() > 1e-9 * (1.0 + ey.abs()) {
            return Err(bad(k + 2, "coordinates are not on a uniform grid"));
        }
        if !row.value.is_finite() {
            return Err(bad(k + 2, "value is not finite"));
        }
        if values.insert((row.i, row.j), row.value).is_some() {
            return Err(bad(k + 2, "duplicate node"));
        }
    }
    let full = GridChart::rect(nx, ny, [x0, x0 + (nx - 1) as f64 * dx], [y0, y0 + (ny - 1) as f64 * dy])?;
    let index = |z: epstein_core::Complex64| (((z.re - x0) / dx).round() as usize, ((z.im - y0) / dy).round() as usize);
    let chart = Arc::new(full.restrict(|z| values.contains_key(&index(z)))?);
    Ok(Field::from_nodes(&chart, |n| values.get(&chart.ij(n)).copied().unwrap_or(0.0)))
}
