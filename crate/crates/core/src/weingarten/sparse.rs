//! Compressed-row matrices, ILU(0) and restarted GMRES for the Newton steps.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from (row, col, value) triplets; duplicates are summed
    /// and every diagonal entry is stored, explicitly zero if absent.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.extend((0..n).map(|i| (i, i, 0.0)));
        t.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Incomplete LU factorization on the sparsity pattern of the matrix.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![0usize; n];
        for i in 0..n {
            diag[i] = (lu.row_ptr[i]..lu.row_ptr[i + 1])
                .find(|&k| lu.col[k] == i)
                .ok_or(Error::LinearSolveFailed { residual: f64::INFINITY })?;
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.col[k]] = k;
            }
            for kk in start..end {
                let k = lu.col[kk];
                if k >= i {
                    break;
                }
                let pivot = lu.val[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::LinearSolveFailed { residual: f64::INFINITY });
                }
                let lik = lu.val[kk] / pivot;
                lu.val[kk] = lik;
                for jj in diag[k] + 1..lu.row_ptr[k + 1] {
                    let p = pos[lu.col[jj]];
                    if p != usize::MAX {
                        lu.val[p] -= lik * lu.val[jj];
                    }
                }
            }
            if lu.val[diag[i]] == 0.0 {
                return Err(Error::LinearSolveFailed { residual: f64::INFINITY });
            }
            for k in start..end {
                pos[lu.col[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// z = (LU)⁻¹ r.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let a = &self.lu;
        for i in 0..a.n {
            let mut s = r[i];
            for k in a.row_ptr[i]..self.diag[i] {
                s -= a.val[k] * z[a.col[k]];
            }
            z[i] = s;
        }
        for i in (0..a.n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..a.row_ptr[i + 1] {
                s -= a.val[k] * z[a.col[k]];
            }
            z[i] = s / a.val[self.diag[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Outcome of a GMRES solve.
#[derive(Clone, Copy, Debug)]
pub struct GmresStats {
    pub iterations: usize,
    /// ‖b − Ax‖ / ‖b‖ at exit.
    pub relative_residual: f64,
}

/// Right-preconditioned GMRES(restart). `project` is applied to every
/// Krylov vector and to the solution, e.g. to stay off a known kernel.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    pre: &Ilu0,
    restart: usize,
    max_iter: usize,
    tol: f64,
    project: &dyn Fn(&mut [f64]),
) -> Result<(Vec<f64>, GmresStats)> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((x, GmresStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    while total < max_iter {
        a.mul_vec(&x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        project(&mut r);
        let beta = norm(&r);
        let mut rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        let m = restart.min(max_iter - total);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|x| x / beta).collect());
        let mut hcol: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            pre.apply(&v[k], &mut z);
            project(&mut z);
            a.mul_vec(&z, &mut w);
            project(&mut w);
            let mut h = vec![0.0; k + 2];
            for j in 0..=k {
                h[j] = dot(&w, &v[j]);
                for i in 0..n {
                    w[i] -= h[j] * v[j][i];
                }
            }
            h[k + 1] = norm(&w);
            for j in 0..k {
                let t = cs[j] * h[j] + sn[j] * h[j + 1];
                h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
                h[j] = t;
            }
            let d = libm::hypot(h[k], h[k + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[k] / d, h[k + 1] / d) };
            let next = h[k + 1];
            h[k] = d;
            h[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g[k + 1] = -s * g[k];
            g[k] *= c;
            hcol.push(h);
            k_used = k + 1;
            total += 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= tol || next == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / next).collect());
        }
        // back substitution on the triangular Hessenberg factor
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hcol[j][i] * y[j];
            }
            y[i] = s / hcol[i][i];
        }
        let mut upd = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                upd[i] += yj * v[j][i];
            }
        }
        pre.apply(&upd, &mut z);
        project(&mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        if rel <= tol {
            break;
        }
    }
    a.mul_vec(&x, &mut w);
    for i in 0..n {
        r[i] = b[i] - w[i];
    }
    project(&mut r);
    Ok((x, GmresStats { iterations: total, relative_residual: norm(&r) / bnorm }))
}
