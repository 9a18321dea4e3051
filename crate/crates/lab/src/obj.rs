//! Wavefront OBJ export of grid surfaces in Poincaré-ball coordinates.

use std::fmt::Write as _;
use std::path::Path;

use epstein_core::epstein::EmbeddedSurface;
use epstein_core::minkowski::to_poincare_ball;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// 0-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

/// One vertex per active node; each grid quad with four active corners
/// becomes two triangles.
pub fn surface_mesh(s: &EmbeddedSurface) -> Mesh {
    let chart = s.chart();
    let mut slot = vec![usize::MAX; chart.len()];
    let mut vertices = Vec::new();
    for n in chart.active_nodes() {
        slot[n] = vertices.len();
        vertices.push(to_poincare_ball(&s.point(n)));
    }
    let (nx, ny) = (chart.nx(), chart.ny());
    let mut faces = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let c = [chart.index(i, j), chart.index(i + 1, j), chart.index(i + 1, j + 1), chart.index(i, j + 1)]
                .map(|n| slot[n]);
            if c.iter().all(|&v| v != usize::MAX) {
                faces.push([c[0], c[1], c[2]]);
                faces.push([c[0], c[2], c[3]]);
            }
        }
    }
    Mesh { vertices, faces }
}

pub fn to_obj_string(m: &Mesh) -> String {
    let mut out = String::new();
    for v in &m.vertices {
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
    }
    for f in &m.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn write_obj(path: &Path, s: &EmbeddedSurface) -> Result<Mesh> {
    let mesh = surface_mesh(s);
    std::fs::write(path, to_obj_string(&mesh)).map_err(|e| LabError::io(path, e))?;
    Ok(mesh)
}

/// Reads `v` and `f` lines (triangles, plain vertex indices); other lines
/// are skipped.
pub fn read_obj(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let bad = |line: usize, why: &str| LabError::Format { path: path.to_path_buf(), line, why: why.to_string() };
    let mut mesh = Mesh { vertices: Vec::new(), faces: Vec::new() };
    for (k, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xs: Vec<f64> = parts.map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(k + 1, "bad vertex"))?;
                if xs.len() != 3 {
                    return Err(bad(k + 1, "vertex needs three coordinates"));
                }
                mesh.vertices.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let ix: Vec<usize> =
                    parts.map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(k + 1, "bad face"))?;
                if ix.len() != 3 || ix.iter().any(|&i| i == 0 || i > mesh.vertices.len()) {
                    return Err(bad(k + 1, "face needs three valid vertex indices"));
                }
                mesh.faces.push([ix[0] - 1, ix[1] - 1, ix[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(mesh)
}
