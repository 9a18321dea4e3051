//! Schouten tensors of conformally flat metrics on the flat 3-torus.
//!
//! Symmetric 3-tensors are stored as `[xx, xy, xz, yy, yz, zz]`.

use alloc::vec::Vec;

use crate::{Error, Result};

pub type Sym3 = [f64; 6];

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Periodic cube [0, n h)³ with `n` nodes per axis; node (i, j, k) has index
/// i + n (j + n k).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicCube {
    pub n: usize,
    pub h: f64,
}

impl PeriodicCube {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 5 || !(h > 0.0) {
            return Err(Error::InvalidChart("cube needs n >= 5 and h > 0"));
        }
        Ok(PeriodicCube { n, h })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [(idx % n) as f64 * self.h, ((idx / n) % n) as f64 * self.h, (idx / (n * n)) as f64 * self.h]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    fn shift(&self, idx: usize, axis: usize, k: i64) -> usize {
        let n = self.n as i64;
        let mut c = [(idx % self.n) as i64, ((idx / self.n) % self.n) as i64, (idx / (self.n * self.n)) as i64];
        c[axis] = (c[axis] + k).rem_euclid(n);
        (c[0] + n * (c[1] + n * c[2])) as usize
    }

    fn d1(&self, f: &dyn Fn(usize) -> f64, idx: usize, a: usize) -> f64 {
        (f(self.shift(idx, a, 1)) - f(self.shift(idx, a, -1))) / (2.0 * self.h)
    }

    fn d2(&self, f: &dyn Fn(usize) -> f64, idx: usize, a: usize, b: usize) -> f64 {
        if a == b {
            (f(self.shift(idx, a, 1)) - 2.0 * f(idx) + f(self.shift(idx, a, -1))) / (self.h * self.h)
        } else {
            let pp = self.shift(self.shift(idx, a, 1), b, 1);
            let pm = self.shift(self.shift(idx, a, 1), b, -1);
            let mp = self.shift(self.shift(idx, a, -1), b, 1);
            let mm = self.shift(self.shift(idx, a, -1), b, -1);
            (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * self.h * self.h)
        }
    }

    /// First and second finite differences of a sampled function at a node.
    fn jet2(&self, f: &dyn Fn(usize) -> f64, idx: usize) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut g = [0.0; 3];
        let mut hs = [[0.0; 3]; 3];
        for a in 0..3 {
            g[a] = self.d1(f, idx, a);
            for b in a..3 {
                hs[a][b] = self.d2(f, idx, a, b);
                hs[b][a] = hs[a][b];
            }
        }
        (g, hs)
    }
}

/// Sch_{e^{2u}δ} = −Hess u + du⊗du − ½|du|²δ on the flat torus (d = 3 only).
pub fn schouten_conformal(d: usize, cube: &PeriodicCube, u: &[f64]) -> Result<Vec<Sym3>> {
    if d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if u.len() != cube.len() {
        return Err(Error::InvalidInput("sample count does not match the cube"));
    }
    let f = |i: usize| u[i];
    Ok((0..cube.len())
        .map(|idx| {
            let (g, h) = cube.jet2(&f, idx);
            let sq = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
            let mut out = [0.0; 6];
            for (s, &(i, j)) in PAIRS.iter().enumerate() {
                out[s] = -h[i][j] + g[i] * g[j] - if i == j { 0.5 * sq } else { 0.0 };
            }
            out
        })
        .collect())
}

/// h₂ = −Sch.
pub fn h2_from_schouten(sch: &[Sym3]) -> Vec<Sym3> {
    sch.iter().map(|s| s.map(|v| -v)).collect()
}

fn inv3(g: &Sym3) -> Option<[[f64; 3]; 3]> {
    let m = [[g[0], g[1], g[2]], [g[1], g[3], g[4]], [g[2], g[4], g[5]]];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !(det > 0.0) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a0, a1) = ((j + 1) % 3, (j + 2) % 3);
            let (b0, b1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a0][b0] * m[a1][b1] - m[a0][b1] * m[a1][b0]) / det;
        }
    }
    Some(inv)
}

/// Schouten tensor of an arbitrary sampled metric on the cube, via Ricci
/// assembled from finite-difference Christoffel symbols:
/// Ric_ij = ∂_kΓ^k_ij − ∂_jΓ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik,
/// Sch = Ric − (Scal/4) g.
pub fn schouten_from_metric(cube: &PeriodicCube, g: &[Sym3]) -> Result<Vec<Sym3>> {
    if g.len() != cube.len() {
        return Err(Error::InvalidInput("sample count does not match the cube"));
    }
    let mut out = Vec::with_capacity(cube.len());
    for idx in 0..cube.len() {
        let gi = inv3(&g[idx]).ok_or(Error::DegenerateMetric { node: idx })?;
        // dg[c][a] = ∂_a g_c,  ddg[c][a][b] = ∂_a∂_b g_c
        let mut dg = [[0.0; 3]; 6];
        let mut ddg = [[[0.0; 3]; 3]; 6];
        for c in 0..6 {
            let f = |i: usize| g[i][c];
            let (d, h) = cube.jet2(&f, idx);
            dg[c] = d;
            ddg[c] = h;
        }
        let dm = |m: usize, i: usize, j: usize| dg[slot(i, j)][m];
        let ddm = |m: usize, n: usize, i: usize, j: usize| ddg[slot(i, j)][m][n];
        // lowered Christoffels Γ_{l,ij} and their derivatives
        let mut gl = [[[0.0; 3]; 3]; 3];
        let mut dgl = [[[[0.0; 3]; 3]; 3]; 3]; // [m][l][i][j]
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    gl[l][i][j] = 0.5 * (dm(i, j, l) + dm(j, i, l) - dm(l, i, j));
                    for m in 0..3 {
                        dgl[m][l][i][j] = 0.5 * (ddm(m, i, j, l) + ddm(m, j, i, l) - ddm(m, l, i, j));
                    }
                }
            }
        }
        let mut gamma = [[[0.0; 3]; 3]; 3]; // Γ^k_ij
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    gamma[k][i][j] = (0..3).map(|l| gi[k][l] * gl[l][i][j]).sum();
                }
            }
        }
        // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = [[[0.0; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            s += gi[k][a] * dm(m, a, b) * gi[b][l];
                        }
                    }
                    dginv[m][k][l] = -s;
                }
            }
        }
        let dgamma = |m: usize, k: usize, i: usize, j: usize| -> f64 {
            (0..3).map(|l| dginv[m][k][l] * gl[l][i][j] + gi[k][l] * dgl[m][l][i][j]).sum()
        };
        let mut ric = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut r = 0.0;
                for k in 0..3 {
                    r += dgamma(k, k, i, j) - dgamma(j, k, i, k);
                    for l in 0..3 {
                        r += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                    }
                }
                ric[i][j] = r;
            }
        }
        let mut scal = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                scal += gi[i][j] * ric[i][j];
            }
        }
        let mut sch = [0.0; 6];
        for (s, &(i, j)) in PAIRS.iter().enumerate() {
            sch[s] = 0.5 * (ric[i][j] + ric[j][i]) - 0.25 * scal * g[idx][s];
        }
        out.push(sch);
    }
    Ok(out)
}

/// Hess_{e^{2a}δ}u − du⊗du + ½‖du‖²_{e^{2a}δ} e^{2a}δ, the predicted change
/// of h₂ under e^{2a}δ → e^{2(a+u)}δ.
pub fn h2_change_closed_form(cube: &PeriodicCube, a: &[f64], u: &[f64]) -> Result<Vec<Sym3>> {
    if a.len() != cube.len() || u.len() != cube.len() {
        return Err(Error::InvalidInput("sample count does not match the cube"));
    }
    let fa = |i: usize| a[i];
    let fu = |i: usize| u[i];
    Ok((0..cube.len())
        .map(|idx| {
            let (da, _) = cube.jet2(&fa, idx);
            let (du, h) = cube.jet2(&fu, idx);
            let dot = da[0] * du[0] + da[1] * du[1] + da[2] * du[2];
            let sq = du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
            let mut out = [0.0; 6];
            for (s, &(i, j)) in PAIRS.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                let hess = h[i][j] - (da[i] * du[j] + da[j] * du[i]) + dot * delta;
                out[s] = hess - du[i] * du[j] + 0.5 * sq * delta;
            }
            out
        })
        .collect())
}

/// Sup over nodes and components of |a − b|.
pub fn sup_diff3(a: &[Sym3], b: &[Sym3]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
}

/// e^{2u}δ as a sampled metric.
pub fn conformal_metric3(u: &[f64]) -> Vec<Sym3> {
    u.iter()
        .map(|&v| {
            let e = libm::exp(2.0 * v);
            [e, 0.0, 0.0, e, 0.0, e]
        })
        .collect()
}
