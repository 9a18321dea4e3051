//! Grid charts, fields and finite-difference tensor calculus.

mod field;
mod grid;
mod metric;
pub mod stencil;

use alloc::sync::Arc;
use core::ops::{Add, Mul};

pub use field::{
    same_chart, ComplexField, CovectorField, Field, OperatorField, PointNorm, ScalarField, SymTensor2Field,
};
pub use grid::{Boundary, GridChart, NodeKind};
pub use metric::{
    codazzi_residual, conformal_factor, gauss_curvature, hessian_conformal, hessian_metric, tensor_pairing,
    traceless_part, BaseMetric, ConformalMetric,
};

use crate::linalg::Sym2;
use crate::Result;

/// Derivative along `axis` of a field whose values across a periodic seam
/// are related by `lift` (identity for genuinely periodic data).
pub fn fd_derivative_lifted<T, F>(f: &Field<T>, axis: usize, lift: F) -> Result<Field<T>>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(T, [i8; 2]) -> T,
{
    let chart = f.chart().clone();
    Field::try_from_nodes(&chart, |n| Ok(stencil::first(&chart, n, axis)?.apply_lifted(f.values(), &lift)))
}

pub fn fd_partial(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let chart = f.chart().clone();
    Field::try_from_nodes(&chart, |n| Ok(stencil::first(&chart, n, axis)?.apply(f.values())))
}

pub fn fd_gradient(f: &ScalarField) -> Result<CovectorField> {
    let chart = f.chart().clone();
    Field::try_from_nodes(&chart, |n| {
        Ok([
            stencil::first(&chart, n, 0)?.apply(f.values()),
            stencil::first(&chart, n, 1)?.apply(f.values()),
        ])
    })
}

/// Flat Hessian: three-point second differences on the diagonal, ∂y∂x for
/// the mixed term.
pub fn fd_hessian_flat(f: &ScalarField) -> Result<SymTensor2Field> {
    let chart: Arc<GridChart> = f.chart().clone();
    let fx = fd_partial(f, 0)?;
    Field::try_from_nodes(&chart, |n| {
        Ok(Sym2::new(
            stencil::second(&chart, n, 0)?.apply(f.values()),
            stencil::first(&chart, n, 1)?.apply(fx.values()),
            stencil::second(&chart, n, 1)?.apply(f.values()),
        ))
    })
}

pub fn fd_laplacian(f: &ScalarField) -> Result<ScalarField> {
    let chart = f.chart().clone();
    Field::try_from_nodes(&chart, |n| {
        Ok(stencil::second(&chart, n, 0)?.apply(f.values()) + stencil::second(&chart, n, 1)?.apply(f.values()))
    })
}

/// Convergence order log2(e_coarse / e_fine) of a halved-spacing pair.
pub fn convergence_order(coarse: f64, fine: f64) -> f64 {
    libm::log2(coarse / fine)
}
