use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

/// How one chart axis ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The axis closes up (flat torus direction).
    Periodic,
    /// The axis ends; boundary nodes get one-sided stencils and Dirichlet
    /// problems fix values on a margin there.
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// All eight neighbours exist: centered stencils everywhere.
    Interior,
    Boundary,
    Excluded,
}

/// Rectangular grid over a planar domain. Node `(i, j)` sits at
/// `z = (x0 + i dx) + i (y0 + j dy)` and has flat index `j * nx + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridChart {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    boundary: [Boundary; 2],
    kinds: Vec<NodeKind>,
    depth: Vec<u32>,
}

impl GridChart {
    pub fn new(
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        boundary: [Boundary; 2],
    ) -> Result<Self> {
        if nx < 5 || ny < 5 {
            return Err(Error::InvalidChart("need at least 5 nodes per axis"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidChart("spacings must be positive"));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidChart("origin must be finite"));
        }
        let mut chart = GridChart {
            nx,
            ny,
            x0,
            y0,
            dx,
            dy,
            boundary,
            kinds: vec![NodeKind::Interior; nx * ny],
            depth: vec![0; nx * ny],
        };
        chart.classify(&vec![false; nx * ny])?;
        Ok(chart)
    }

    /// Dirichlet rectangle `[x_lo, x_hi] × [y_lo, y_hi]` with nodes on both ends.
    pub fn rect(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidChart("need at least 5 nodes per axis"));
        }
        let dx = (x[1] - x[0]) / (nx - 1) as f64;
        let dy = (y[1] - y[0]) / (ny - 1) as f64;
        Self::new(nx, ny, x[0], y[0], dx, dy, [Boundary::Dirichlet; 2])
    }

    /// Flat torus `[x0, x0 + lx) × [y0, y0 + ly)`.
    pub fn torus(nx: usize, ny: usize, x0: f64, y0: f64, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, x0, y0, lx / nx as f64, ly / ny as f64, [Boundary::Periodic; 2])
    }

    /// Excludes every node whose coordinate fails `keep`, then prunes nodes
    /// left without a second-order stencil along some axis.
    pub fn restrict(mut self, keep: impl Fn(Complex64) -> bool) -> Result<Self> {
        let mut excluded: Vec<bool> = (0..self.len()).map(|n| !keep(self.z(n))).collect();
        loop {
            let mut changed = false;
            for node in 0..self.len() {
                if !excluded[node] && !self.stencilable(node, &excluded) {
                    excluded[node] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.classify(&excluded)?;
        Ok(self)
    }

    fn stencilable(&self, node: usize, excluded: &[bool]) -> bool {
        let (i, j) = self.ij(node);
        let ok = |di: i64, dj: i64| self.offset_raw(i, j, di, dj).is_some_and(|m| !excluded[m]);
        let axis = |ax: i64, ay: i64| {
            (ok(ax, ay) && ok(-ax, -ay))
                || (ok(ax, ay) && ok(2 * ax, 2 * ay) && ok(3 * ax, 3 * ay))
                || (ok(-ax, -ay) && ok(-2 * ax, -2 * ay) && ok(-3 * ax, -3 * ay))
        };
        axis(1, 0) && axis(0, 1)
    }

    fn classify(&mut self, excluded: &[bool]) -> Result<()> {
        let n = self.len();
        let mut depth = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for node in 0..n {
            if excluded[node] {
                depth[node] = 0;
                continue;
            }
            let (i, j) = self.ij(node);
            let mut seed = (self.boundary[0] == Boundary::Dirichlet && (i == 0 || i == self.nx - 1))
                || (self.boundary[1] == Boundary::Dirichlet && (j == 0 || j == self.ny - 1));
            if !seed {
                'outer: for dj in -1..=1i64 {
                    for di in -1..=1i64 {
                        if let Some(m) = self.offset_raw(i, j, di, dj) {
                            if excluded[m] {
                                seed = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            if seed {
                depth[node] = 0;
                queue.push_back(node);
            }
        }
        while let Some(node) = queue.pop_front() {
            let (i, j) = self.ij(node);
            for dj in -1..=1i64 {
                for di in -1..=1i64 {
                    if let Some(m) = self.offset_raw(i, j, di, dj) {
                        if !excluded[m] && depth[m] == u32::MAX {
                            depth[m] = depth[node] + 1;
                            queue.push_back(m);
                        }
                    }
                }
            }
        }
        let mut kinds = vec![NodeKind::Interior; n];
        for node in 0..n {
            kinds[node] = if excluded[node] {
                NodeKind::Excluded
            } else if depth[node] == 0 {
                NodeKind::Boundary
            } else {
                NodeKind::Interior
            };
        }
        if kinds.iter().all(|k| *k == NodeKind::Excluded) {
            return Err(Error::InvalidChart("every node is excluded"));
        }
        self.kinds = kinds;
        self.depth = depth;
        Ok(())
    }

    fn offset_raw(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<usize> {
        let i = wrap_axis(i as i64 + di, self.nx, self.boundary[0])?.0;
        let j = wrap_axis(j as i64 + dj, self.ny, self.boundary[1])?.0;
        Some(self.index(i, j))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.dx
        } else {
            self.dy
        }
    }

    pub fn boundary(&self) -> [Boundary; 2] {
        self.boundary
    }

    /// Length of a periodic axis.
    pub fn period(&self, axis: usize) -> Option<f64> {
        match self.boundary[axis] {
            Boundary::Periodic if axis == 0 => Some(self.nx as f64 * self.dx),
            Boundary::Periodic => Some(self.ny as f64 * self.dy),
            Boundary::Dirichlet => None,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn z(&self, node: usize) -> Complex64 {
        let (i, j) = self.ij(node);
        Complex64::new(self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy)
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.kinds[node] != NodeKind::Excluded
    }

    /// Chebyshev distance to the nearest Dirichlet edge or excluded node
    /// (`u32::MAX` on a torus without exclusions).
    pub fn depth(&self, node: usize) -> u32 {
        self.depth[node]
    }

    /// Non-excluded nodes, in index order.
    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&n| self.is_active(n))
    }

    /// Non-excluded nodes at depth at least `margin`.
    pub fn nodes_with_margin(&self, margin: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&n| self.is_active(n) && self.depth[n] >= margin)
    }

    /// Walks `k` steps along `axis`; returns the node reached and how many
    /// times each periodic seam was crossed (signed).
    pub fn step(&self, node: usize, axis: usize, k: i64) -> Option<(usize, [i8; 2])> {
        let (i, j) = self.ij(node);
        let mut wraps = [0i8; 2];
        let m = if axis == 0 {
            let (ii, w) = wrap_axis(i as i64 + k, self.nx, self.boundary[0])?;
            wraps[0] = w;
            self.index(ii, j)
        } else {
            let (jj, w) = wrap_axis(j as i64 + k, self.ny, self.boundary[1])?;
            wraps[1] = w;
            self.index(i, jj)
        };
        self.is_active(m).then_some((m, wraps))
    }

    /// Quadrature weight: trapezoid along Dirichlet axes, plain sums along
    /// periodic ones, zero on excluded nodes.
    pub fn weight(&self, node: usize) -> f64 {
        if !self.is_active(node) {
            return 0.0;
        }
        let (i, j) = self.ij(node);
        let mut w = self.dx * self.dy;
        if self.boundary[0] == Boundary::Dirichlet && (i == 0 || i == self.nx - 1) {
            w *= 0.5;
        }
        if self.boundary[1] == Boundary::Dirichlet && (j == 0 || j == self.ny - 1) {
            w *= 0.5;
        }
        w
    }

    /// Same lattice with spacing halved and node counts adjusted to cover the
    /// same rectangle; exclusions must be re-applied by the caller.
    pub fn refined(&self) -> Result<Self> {
        let (nx, ny) = match self.boundary {
            [bx, by] => (refine_count(self.nx, bx), refine_count(self.ny, by)),
        };
        Self::new(nx, ny, self.x0, self.y0, self.dx / 2.0, self.dy / 2.0, self.boundary)
    }
}

fn refine_count(n: usize, b: Boundary) -> usize {
    match b {
        Boundary::Periodic => 2 * n,
        Boundary::Dirichlet => 2 * n - 1,
    }
}

fn wrap_axis(k: i64, n: usize, b: Boundary) -> Option<(usize, i8)> {
    let n = n as i64;
    if (0..n).contains(&k) {
        return Some((k as usize, 0));
    }
    match b {
        Boundary::Dirichlet => None,
        Boundary::Periodic => {
            let w = k.div_euclid(n);
            Some((k.rem_euclid(n) as usize, w as i8))
        }
    }
}
