//! Schwarzian derivatives of holomorphic maps and Schwarzian tensors of
//! conformal changes of metric.

mod jet;
pub mod schouten;

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

pub use jet::{HolomorphicMap, Jet3, SampledMap};

use crate::calculus::{
    fd_derivative_lifted, fd_gradient, hessian_conformal, traceless_part, ComplexField,
    ConformalMetric, Field, GridChart, ScalarField, SymTensor2Field,
};
use crate::linalg::Sym2;
use crate::{Error, Result};

/// Depth margin used by the sup-norm residuals of this module.
pub const RESIDUAL_MARGIN: u32 = 2;

const CRITICAL_EPS: f64 = 1e-12;

/// Per-node values g(z) of a quadratic differential g dz².
#[derive(Clone, Debug)]
pub struct QuadDiffField {
    values: ComplexField,
    holomorphy_residual: f64,
}

impl QuadDiffField {
    /// Wraps values and measures sup |∂̄g| at interior nodes.
    pub fn new(values: ComplexField) -> Result<Self> {
        let gx = fd_derivative_lifted(&values, 0, |v, _| v)?;
        let gy = fd_derivative_lifted(&values, 1, |v, _| v)?;
        let dbar = gx.zip_map(&gy, |a, b| (a + Complex64::new(0.0, 1.0) * b) * 0.5)?;
        Ok(QuadDiffField { holomorphy_residual: dbar.sup_norm(1), values })
    }

    pub fn from_fn(chart: &Arc<GridChart>, g: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(Field::from_fn(chart, g))
    }

    pub fn values(&self) -> &ComplexField {
        &self.values
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        self.values.chart()
    }

    pub fn holomorphy_residual(&self) -> f64 {
        self.holomorphy_residual
    }

    /// Re(g dz²) = Re g (dx² − dy²) − 2 Im g dx dy.
    pub fn real_part(&self) -> SymTensor2Field {
        self.values.map(re_quadratic)
    }
}

/// Components of Re(q dz²).
pub fn re_quadratic(q: Complex64) -> Sym2 {
    Sym2::new(q.re, -q.im, -q.re)
}

fn checked_jets(f: &HolomorphicMap, chart: &Arc<GridChart>) -> Result<Vec<Jet3>> {
    let jets = f.jets(chart)?;
    for n in chart.active_nodes() {
        if jets[n].d1().norm() < CRITICAL_EPS {
            return Err(Error::CriticalPoint { z: chart.z(n) });
        }
    }
    Ok(jets)
}

/// S(f) dz² on the chart.
pub fn schwarzian_derivative(f: &HolomorphicMap, chart: &Arc<GridChart>) -> Result<QuadDiffField> {
    let jets = checked_jets(f, chart)?;
    QuadDiffField::new(Field::from_nodes(chart, |n| jets[n].schwarzian()))
}

/// sup |S(g∘f) − (S(g)∘f)(f′)² − S(f)| with closed-form jets.
pub fn cocycle_residual(f: &HolomorphicMap, g: &HolomorphicMap, chart: &Arc<GridChart>) -> Result<f64> {
    let jf = checked_jets(f, chart)?;
    let mut sup = 0.0f64;
    for n in chart.active_nodes() {
        let jg = g.jet(jf[n].value())?;
        if jg.d1().norm() < CRITICAL_EPS {
            return Err(Error::CriticalPoint { z: chart.z(n) });
        }
        let jgf = jf[n].then(&jg);
        let d1 = jf[n].d1();
        let r = jgf.schwarzian() - jg.schwarzian() * d1 * d1 - jf[n].schwarzian();
        sup = sup.max(r.norm());
    }
    Ok(sup)
}

/// −e^{u} Hess_g(e^{−u}) = Hess_g u − du⊗du, discretized through e^{−u} so
/// no products of differenced derivatives appear.
fn linearized_hessian(g: &ConformalMetric, u: &ScalarField) -> Result<SymTensor2Field> {
    let e = u.map(|v| libm::exp(-v));
    hessian_conformal(g, &e)?.zip_map(u, |t, v| t * -libm::exp(v))
}

/// B(g, e^{2u}g) = (Hess_g u − du⊗du)₀.
pub fn schwarzian_tensor(g: &ConformalMetric, u: &ScalarField) -> Result<SymTensor2Field> {
    traceless_part(&linearized_hessian(g, u)?, &g.tensor())
}

/// B̄(h, e^{2u}h) = Hess_h u − du⊗du + ½‖du‖²_h h.
pub fn bbar_tensor(h: &ConformalMetric, u: &ScalarField) -> Result<SymTensor2Field> {
    let du = fd_gradient(u)?;
    // ‖du‖²_h h = |du|²_δ δ for conformal h
    linearized_hessian(h, u)?.zip_map(&du, |t, d| t + Sym2::scalar(0.5 * (d[0] * d[0] + d[1] * d[1])))
}

/// sup |B(|dz|², f*|dz|²) − Re S(f)| with u = log|f′| sampled from jets.
pub fn schwarzian_vs_derivative_residual(f: &HolomorphicMap, chart: &Arc<GridChart>) -> Result<f64> {
    let jets = checked_jets(f, chart)?;
    let u = Field::from_nodes(chart, |n| libm::log(jets[n].d1().norm()));
    let flat = ConformalMetric::flat(Field::constant(chart, 0.0));
    let b = schwarzian_tensor(&flat, &u)?;
    let s = Field::from_nodes(chart, |n| re_quadratic(jets[n].schwarzian()));
    b.sup_diff(&s, RESIDUAL_MARGIN)
}

/// sup of B(g, e^{2u+2v}g) − B(g, e^{2u}g) − B(e^{2u}g, e^{2u+2v}g).
pub fn cocycle_tensor_residual(g: &ConformalMetric, u: &ScalarField, v: &ScalarField) -> Result<f64> {
    let uv = u.zip_map(v, |a, b| a + b)?;
    let lhs = schwarzian_tensor(g, &uv)?;
    let first = schwarzian_tensor(g, u)?;
    let second = schwarzian_tensor(&g.conformal_change(u)?, v)?;
    let rhs = first.zip_map(&second, |a, b| a + b)?;
    lhs.sup_diff(&rhs, RESIDUAL_MARGIN)
}

/// Map cocycle checked through the tensor route: closed-form Re S(g∘f)
/// against B(δ, e^{2u}δ) + B(e^{2u}δ, e^{2u+2v}δ) with u = log|f′| and
/// v = log|g′∘f| sampled on the chart.
pub fn cocycle_map_residual_fd(f: &HolomorphicMap, g: &HolomorphicMap, chart: &Arc<GridChart>) -> Result<f64> {
    let jf = checked_jets(f, chart)?;
    let mut jg = Vec::with_capacity(chart.len());
    for n in 0..chart.len() {
        jg.push(if chart.is_active(n) { g.jet(jf[n].value())? } else { Jet3::default() });
    }
    let u = Field::from_nodes(chart, |n| libm::log(jf[n].d1().norm()));
    let v = Field::from_nodes(chart, |n| libm::log(jg[n].d1().norm()));
    let flat = ConformalMetric::flat(Field::constant(chart, 0.0));
    let first = schwarzian_tensor(&flat, &u)?;
    let second = schwarzian_tensor(&flat.conformal_change(&u)?, &v)?;
    let exact = Field::from_nodes(chart, |n| re_quadratic(jf[n].then(&jg[n]).schwarzian()));
    let rhs = first.zip_map(&second, |a, b| a + b)?;
    exact.sup_diff(&rhs, RESIDUAL_MARGIN)
}

/// Result of the pointwise Nehari comparison |S(f)| ≤ (3/2)ρ.
#[derive(Clone, Copy, Debug)]
pub struct NehariRatio {
    /// sup |S(f)|/ρ with ρ = 4/(1 − |z|²)².
    pub ratio: f64,
    pub argmax: Complex64,
    pub pass: bool,
}

/// Nehari ratio over the disk nodes of `chart`, ignoring the rim
/// |z| > 1 − 5dx.
pub fn nehari_ratio(f: &HolomorphicMap, chart: &Arc<GridChart>, tol: f64) -> Result<NehariRatio> {
    let rim = 1.0 - 5.0 * chart.dx().max(chart.dy());
    let mut best = NehariRatio { ratio: 0.0, argmax: Complex64::new(0.0, 0.0), pass: true };
    for n in chart.active_nodes() {
        let z = chart.z(n);
        if z.norm() > rim {
            continue;
        }
        let j = f.jet(z)?;
        if j.d1().norm() < CRITICAL_EPS {
            return Err(Error::CriticalPoint { z });
        }
        let one_minus = 1.0 - z.norm_sqr();
        let r = j.schwarzian().norm() * one_minus * one_minus / 4.0;
        if r > best.ratio {
            best.ratio = r;
            best.argmax = z;
        }
    }
    best.pass = best.ratio <= 1.5 + tol;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_has_constant_schwarzian() {
        let c = Arc::new(GridChart::rect(9, 9, [-1.0, 1.0], [-1.0, 1.0]).unwrap());
        let s = schwarzian_derivative(&HolomorphicMap::Exp, &c).unwrap();
        for n in c.active_nodes() {
            assert!((s.values().get(n) - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
        }
        assert!(s.holomorphy_residual() < 1e-14);
    }

    #[test]
    fn square_has_critical_point_at_origin() {
        let c = Arc::new(GridChart::rect(9, 9, [-1.0, 1.0], [-1.0, 1.0]).unwrap());
        assert!(matches!(
            schwarzian_derivative(&HolomorphicMap::Square, &c),
            Err(Error::CriticalPoint { .. })
        ));
    }
}
