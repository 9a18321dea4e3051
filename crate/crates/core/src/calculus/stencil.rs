//! Second-order finite-difference stencils on a [`GridChart`].
//!
//! Centered where both neighbours exist, one-sided otherwise. Each tap
//! records how many periodic seams it crossed so vector-valued fields that
//! are only equivariant (not periodic) can be lifted before differencing.

use core::ops::{Add, Mul};

use super::grid::GridChart;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tap {
    pub node: usize,
    pub wrap: [i8; 2],
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    taps: [Tap; 4],
    len: usize,
}

impl Stencil {
    fn from_slice(t: &[Tap]) -> Self {
        let mut taps = [Tap::default(); 4];
        taps[..t.len()].copy_from_slice(t);
        Stencil { taps, len: t.len() }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps[..self.len]
    }

    pub fn apply(&self, f: &[f64]) -> f64 {
        self.taps().iter().map(|t| t.weight * f[t.node]).sum()
    }

    /// Applies the stencil to a vector field, mapping each tapped value
    /// through `lift` (identity for periodic data).
    pub fn apply_lifted<T, F>(&self, f: &[T], lift: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(T, [i8; 2]) -> T,
    {
        let mut acc = T::default();
        for t in self.taps() {
            let v = if t.wrap == [0, 0] { f[t.node] } else { lift(f[t.node], t.wrap) };
            acc = acc + v * t.weight;
        }
        acc
    }
}

fn walk(chart: &GridChart, node: usize, axis: usize, ks: &[i64]) -> Option<[(usize, [i8; 2]); 4]> {
    let mut out = [(node, [0i8; 2]); 4];
    for (slot, &k) in out.iter_mut().zip(ks) {
        *slot = if k == 0 { (node, [0, 0]) } else { chart.step(node, axis, k)? };
    }
    Some(out)
}

fn build(nodes: &[(usize, [i8; 2]); 4], weights: &[f64], scale: f64) -> Stencil {
    let mut taps = [Tap::default(); 4];
    for (k, w) in weights.iter().enumerate() {
        taps[k] = Tap { node: nodes[k].0, wrap: nodes[k].1, weight: w * scale };
    }
    Stencil::from_slice(&taps[..weights.len()])
}

/// ∂/∂x (axis 0) or ∂/∂y (axis 1) at `node`.
pub fn first(chart: &GridChart, node: usize, axis: usize) -> Result<Stencil> {
    let h = chart.spacing(axis);
    if let Some(n) = walk(chart, node, axis, &[-1, 1]) {
        return Ok(build(&n, &[-1.0, 1.0], 0.5 / h));
    }
    if let Some(n) = walk(chart, node, axis, &[0, 1, 2]) {
        return Ok(build(&n, &[-3.0, 4.0, -1.0], 0.5 / h));
    }
    if let Some(n) = walk(chart, node, axis, &[0, -1, -2]) {
        return Ok(build(&n, &[3.0, -4.0, 1.0], 0.5 / h));
    }
    Err(Error::MaskTooSparse { node })
}

/// ∂²/∂x² or ∂²/∂y² at `node`.
pub fn second(chart: &GridChart, node: usize, axis: usize) -> Result<Stencil> {
    let h = chart.spacing(axis);
    let s = 1.0 / (h * h);
    if let Some(n) = walk(chart, node, axis, &[-1, 0, 1]) {
        return Ok(build(&n, &[1.0, -2.0, 1.0], s));
    }
    if let Some(n) = walk(chart, node, axis, &[0, 1, 2, 3]) {
        return Ok(build(&n, &[2.0, -5.0, 4.0, -1.0], s));
    }
    if let Some(n) = walk(chart, node, axis, &[0, -1, -2, -3]) {
        return Ok(build(&n, &[2.0, -5.0, 4.0, -1.0], s));
    }
    Err(Error::MaskTooSparse { node })
}

/// Taps of ∂²/∂x∂y at `node`, formed as ∂y applied to ∂x; up to 9 entries
/// after merging coincident nodes.
pub fn mixed(chart: &GridChart, node: usize) -> Result<alloc::vec::Vec<Tap>> {
    let sy = first(chart, node, 1)?;
    let mut out: alloc::vec::Vec<Tap> = alloc::vec::Vec::with_capacity(9);
    for ty in sy.taps() {
        let sx = first(chart, ty.node, 0)?;
        for tx in sx.taps() {
            let wrap = [tx.wrap[0] + ty.wrap[0], tx.wrap[1] + ty.wrap[1]];
            let weight = tx.weight * ty.weight;
            match out.iter_mut().find(|t| t.node == tx.node && t.wrap == wrap) {
                Some(t) => t.weight += weight,
                None => out.push(Tap { node: tx.node, wrap, weight }),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::grid::Boundary;

    #[test]
    fn one_sided_at_edges_is_exact_on_quadratics() {
        let c = GridChart::rect(6, 6, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let f: alloc::vec::Vec<f64> = (0..c.len()).map(|n| c.z(n).re.powi(2)).collect();
        for i in 0..6 {
            let node = c.index(i, 2);
            let x = c.z(node).re;
            assert!((first(&c, node, 0).unwrap().apply(&f) - 2.0 * x).abs() < 1e-12);
            assert!((second(&c, node, 0).unwrap().apply(&f) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_interior_has_four_corners() {
        let c = GridChart::new(8, 8, 0.0, 0.0, 0.1, 0.1, [Boundary::Periodic; 2]).unwrap();
        let taps = mixed(&c, c.index(0, 0)).unwrap();
        assert_eq!(taps.len(), 4);
        let s: f64 = taps.iter().map(|t| t.weight.abs()).sum();
        assert!((s - 1.0 / 0.01).abs() < 1e-9);
    }
}
