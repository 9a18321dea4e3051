use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::grid::GridChart;
use crate::linalg::{Mat2, Sym2};
use crate::{Error, Result};

/// Per-node values on a shared chart. Excluded nodes hold `T::default()`.
#[derive(Clone, Debug)]
pub struct Field<T> {
    chart: Arc<GridChart>,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type CovectorField = Field<[f64; 2]>;
/// Components (T11, T12, T22) in the chart frame.
pub type SymTensor2Field = Field<Sym2>;
pub type OperatorField = Field<Mat2>;
pub type ComplexField = Field<Complex64>;

/// Pointwise size used by sup-norms.
pub trait PointNorm {
    fn point_norm(&self) -> f64;
}

impl PointNorm for f64 {
    fn point_norm(&self) -> f64 {
        self.abs()
    }
}

impl PointNorm for [f64; 2] {
    fn point_norm(&self) -> f64 {
        self[0].abs().max(self[1].abs())
    }
}

impl PointNorm for Sym2 {
    fn point_norm(&self) -> f64 {
        self.max_abs()
    }
}

impl PointNorm for Mat2 {
    fn point_norm(&self) -> f64 {
        self.max_abs()
    }
}

impl PointNorm for Complex64 {
    fn point_norm(&self) -> f64 {
        self.norm()
    }
}

pub fn same_chart(a: &Arc<GridChart>, b: &Arc<GridChart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Copy + Default> Field<T> {
    pub fn new(chart: Arc<GridChart>, values: Vec<T>) -> Result<Self> {
        if values.len() != chart.len() {
            return Err(Error::InvalidInput("value count does not match chart size"));
        }
        Ok(Field { chart, values })
    }

    /// Samples `f` at every active node.
    pub fn from_fn(chart: &Arc<GridChart>, f: impl Fn(Complex64) -> T) -> Self {
        let values = (0..chart.len())
            .map(|n| if chart.is_active(n) { f(chart.z(n)) } else { T::default() })
            .collect();
        Field { chart: chart.clone(), values }
    }

    /// Builds a field node by node.
    pub fn from_nodes(chart: &Arc<GridChart>, mut f: impl FnMut(usize) -> T) -> Self {
        let values = (0..chart.len())
            .map(|n| if chart.is_active(n) { f(n) } else { T::default() })
            .collect();
        Field { chart: chart.clone(), values }
    }

    pub fn try_from_nodes(chart: &Arc<GridChart>, mut f: impl FnMut(usize) -> Result<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(chart.len());
        for n in 0..chart.len() {
            values.push(if chart.is_active(n) { f(n)? } else { T::default() });
        }
        Ok(Field { chart: chart.clone(), values })
    }

    pub fn constant(chart: &Arc<GridChart>, v: T) -> Self {
        Self::from_nodes(chart, |_| v)
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        &self.chart
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, node: usize) -> T {
        self.values[node]
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field::from_nodes(&self.chart, |n| f(self.values[n]))
    }

    pub fn zip_map<S: Copy + Default, U: Copy + Default>(
        &self,
        other: &Field<S>,
        f: impl Fn(T, S) -> U,
    ) -> Result<Field<U>> {
        self.check_chart(other.chart())?;
        Ok(Field::from_nodes(&self.chart, |n| f(self.values[n], other.values[n])))
    }

    pub fn check_chart(&self, other: &Arc<GridChart>) -> Result<()> {
        if same_chart(&self.chart, other) {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }
}

impl<T: Copy + Default + PointNorm> Field<T> {
    /// Sup of the pointwise norm over active nodes at depth ≥ `margin`.
    pub fn sup_norm(&self, margin: u32) -> f64 {
        self.chart
            .nodes_with_margin(margin)
            .map(|n| self.values[n].point_norm())
            .fold(0.0, f64::max)
    }
}

impl<T> Field<T>
where
    T: Copy + Default + core::ops::Sub<Output = T> + PointNorm,
{
    /// Sup-norm of `self - other` at depth ≥ `margin`.
    pub fn sup_diff(&self, other: &Field<T>, margin: u32) -> Result<f64> {
        Ok(self.zip_map(other, |a, b| a - b)?.sup_norm(margin))
    }
}

impl ScalarField {
    /// Quadrature of the field with the chart's trapezoid weights.
    pub fn integrate(&self) -> f64 {
        self.chart.active_nodes().map(|n| self.chart.weight(n) * self.values[n]).sum()
    }
}
