use alloc::sync::Arc;

use num_complex::Complex64;

use super::field::{Field, ScalarField, SymTensor2Field};
use super::grid::GridChart;
use super::{fd_gradient, fd_hessian_flat, fd_laplacian, fd_partial};
use crate::linalg::Sym2;
use crate::{Error, Result};

/// Reference metrics a conformal factor can be written against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMetric {
    /// |dz|²
    Flat,
    /// 4|dz|²/(1+|z|²)², curvature +1.
    Spherical,
    /// 4|dz|²/(1-|z|²)², curvature -1; only defined on the unit disk.
    DiskHyperbolic,
}

impl BaseMetric {
    /// log of the base conformal factor relative to |dz|².
    pub fn log_factor(self, z: Complex64) -> f64 {
        let r2 = z.norm_sqr();
        match self {
            BaseMetric::Flat => 0.0,
            BaseMetric::Spherical => libm::log(2.0 / (1.0 + r2)),
            BaseMetric::DiskHyperbolic => libm::log(2.0 / (1.0 - r2)),
        }
    }
}

/// The metric e^{2u}·base.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    base: BaseMetric,
    u: ScalarField,
}

impl ConformalMetric {
    pub fn new(base: BaseMetric, u: ScalarField) -> Result<Self> {
        if base == BaseMetric::DiskHyperbolic {
            let chart = u.chart();
            if chart.active_nodes().any(|n| chart.z(n).norm_sqr() >= 1.0) {
                return Err(Error::InvalidInput("disk-hyperbolic base needs every node inside |z| < 1"));
            }
        }
        Ok(ConformalMetric { base, u })
    }

    pub fn flat(u: ScalarField) -> Self {
        ConformalMetric { base: BaseMetric::Flat, u }
    }

    /// The base metric itself (u = 0).
    pub fn of_base(chart: &Arc<GridChart>, base: BaseMetric) -> Result<Self> {
        Self::new(base, Field::constant(chart, 0.0))
    }

    pub fn base(&self) -> BaseMetric {
        self.base
    }

    /// Log-factor relative to the base.
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        self.u.chart()
    }

    /// Log-factor relative to |dz|².
    pub fn flat_factor(&self) -> ScalarField {
        let chart = self.chart().clone();
        Field::from_nodes(&chart, |n| self.u.get(n) + self.base.log_factor(chart.z(n)))
    }

    /// Same metric written over another base (exact log-factor arithmetic).
    pub fn rebase(&self, base: BaseMetric) -> Result<Self> {
        let chart = self.chart().clone();
        let u = Field::from_nodes(&chart, |n| {
            let z = chart.z(n);
            self.u.get(n) + self.base.log_factor(z) - base.log_factor(z)
        });
        Self::new(base, u)
    }

    pub fn to_flat(&self) -> Self {
        ConformalMetric::flat(self.flat_factor())
    }

    /// e^{2c}·self.
    pub fn scaled(&self, c: f64) -> Self {
        ConformalMetric { base: self.base, u: self.u.map(|v| v + c) }
    }

    /// e^{2v}·self.
    pub fn conformal_change(&self, v: &ScalarField) -> Result<Self> {
        Ok(ConformalMetric { base: self.base, u: self.u.zip_map(v, |a, b| a + b)? })
    }

    pub fn tensor(&self) -> SymTensor2Field {
        self.flat_factor().map(|f| Sym2::scalar(libm::exp(2.0 * f)))
    }
}

/// Hess_{e^{2w}δ}(v) = Hess_δ v − 2 sym(dw⊗dv) + ⟨dw,dv⟩δ with `h = e^{2w}δ`.
pub fn hessian_conformal(h: &ConformalMetric, v: &ScalarField) -> Result<SymTensor2Field> {
    v.check_chart(h.chart())?;
    let w = h.flat_factor();
    let dw = fd_gradient(&w)?;
    let dv = fd_gradient(v)?;
    let hess = fd_hessian_flat(v)?;
    let chart = v.chart().clone();
    Ok(Field::from_nodes(&chart, |n| {
        let a = dw.get(n);
        let b = dv.get(n);
        let dot = a[0] * b[0] + a[1] * b[1];
        let t = hess.get(n);
        Sym2::new(
            t.xx - 2.0 * a[0] * b[0] + dot,
            t.xy - (a[0] * b[1] + a[1] * b[0]),
            t.yy - 2.0 * a[1] * b[1] + dot,
        )
    }))
}

/// Hessian for an arbitrary metric tensor field, with Christoffel symbols
/// taken from finite differences of the metric components.
pub fn hessian_metric(g: &SymTensor2Field, v: &ScalarField) -> Result<SymTensor2Field> {
    v.check_chart(g.chart())?;
    let comp = |f: fn(&Sym2) -> f64| g.map(move |t| f(&t));
    let (gxx, gxy, gyy) = (comp(|t| t.xx), comp(|t| t.xy), comp(|t| t.yy));
    let d = |f: &ScalarField, a: usize| fd_partial(f, a);
    // dg[k][c]: derivative along k of component c (xx, xy, yy)
    let dg = [
        [d(&gxx, 0)?, d(&gxy, 0)?, d(&gyy, 0)?],
        [d(&gxx, 1)?, d(&gxy, 1)?, d(&gyy, 1)?],
    ];
    let dv = fd_gradient(v)?;
    let hess = fd_hessian_flat(v)?;
    let chart = v.chart().clone();
    Field::try_from_nodes(&chart, |n| {
        let gi = g.get(n).inverse().ok_or(Error::DegenerateMetric { node: n })?;
        let ginv = [[gi.xx, gi.xy], [gi.xy, gi.yy]];
        let dgv = |k: usize, i: usize, j: usize| -> f64 {
            let c = match (i, j) {
                (0, 0) => 0,
                (1, 1) => 2,
                _ => 1,
            };
            dg[k][c].get(n)
        };
        let mut out = [[0.0; 2]; 2];
        let p = dv.get(n);
        let h = hess.get(n);
        let hv = [[h.xx, h.xy], [h.xy, h.yy]];
        for i in 0..2 {
            for j in 0..2 {
                let mut corr = 0.0;
                for m in 0..2 {
                    let mut gamma = 0.0;
                    for k in 0..2 {
                        gamma += ginv[m][k] * 0.5 * (dgv(i, j, k) + dgv(j, i, k) - dgv(k, i, j));
                    }
                    corr += gamma * p[m];
                }
                out[i][j] = hv[i][j] - corr;
            }
        }
        Ok(Sym2::new(out[0][0], 0.5 * (out[0][1] + out[1][0]), out[1][1]))
    })
}

/// K = −e^{−2f} Δf for the flat-base factor f of `h`.
pub fn gauss_curvature(h: &ConformalMetric) -> Result<ScalarField> {
    let f = h.flat_factor();
    let lap = fd_laplacian(&f)?;
    f.zip_map(&lap, |f, l| -libm::exp(-2.0 * f) * l)
}

/// T − ½ tr_g(T)·g.
pub fn traceless_part(t: &SymTensor2Field, g: &SymTensor2Field) -> Result<SymTensor2Field> {
    t.check_chart(g.chart())?;
    let chart = t.chart().clone();
    Field::try_from_nodes(&chart, |n| {
        let gn = g.get(n);
        if !gn.is_positive_definite() {
            return Err(Error::DegenerateMetric { node: n });
        }
        let tn = t.get(n);
        Ok(tn - gn * (0.5 * tn.trace_with(&gn)))
    })
}

/// ∫ ⟨T1, T2⟩_g da_g by trapezoid quadrature.
pub fn tensor_pairing(t1: &SymTensor2Field, t2: &SymTensor2Field, g: &SymTensor2Field) -> Result<f64> {
    t1.check_chart(t2.chart())?;
    t1.check_chart(g.chart())?;
    let chart = t1.chart();
    let mut total = 0.0;
    for n in chart.active_nodes() {
        let gn = g.get(n);
        if !gn.is_positive_definite() {
            return Err(Error::DegenerateMetric { node: n });
        }
        let a = t1.get(n).raise(&gn);
        let b = t2.get(n).raise(&gn);
        total += chart.weight(n) * (a * b).trace() * libm::sqrt(gn.det());
    }
    Ok(total)
}

/// Pointwise chart-frame norm of (∇₁T)(∂₂, ·) − (∇₂T)(∂₁, ·) for the
/// Levi-Civita connection of the conformal metric `g`.
pub fn codazzi_residual(t: &SymTensor2Field, g: &ConformalMetric) -> Result<ScalarField> {
    t.check_chart(g.chart())?;
    let w = fd_gradient(&g.flat_factor())?;
    let comp = |f: fn(&Sym2) -> f64| t.map(move |s| f(&s));
    let (txx, txy, tyy) = (comp(|s| s.xx), comp(|s| s.xy), comp(|s| s.yy));
    let dxx = [fd_partial(&txx, 0)?, fd_partial(&txx, 1)?];
    let dxy = [fd_partial(&txy, 0)?, fd_partial(&txy, 1)?];
    let dyy = [fd_partial(&tyy, 0)?, fd_partial(&tyy, 1)?];
    let chart = t.chart().clone();
    Ok(Field::from_nodes(&chart, |n| {
        let wn = w.get(n);
        let s = t.get(n);
        let tm = [[s.xx, s.xy], [s.xy, s.yy]];
        let dt = |k: usize, i: usize, j: usize| -> f64 {
            match (i, j) {
                (0, 0) => dxx[k].get(n),
                (1, 1) => dyy[k].get(n),
                _ => dxy[k].get(n),
            }
        };
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let gamma = |m: usize, k: usize, i: usize| delta(m, k) * wn[i] + delta(m, i) * wn[k] - delta(k, i) * wn[m];
        let cov = |k: usize, i: usize, j: usize| -> f64 {
            let mut v = dt(k, i, j);
            for m in 0..2 {
                v -= gamma(m, k, i) * tm[m][j] + gamma(m, k, j) * tm[i][m];
            }
            v
        };
        let c0 = cov(0, 1, 0) - cov(1, 0, 0);
        let c1 = cov(0, 1, 1) - cov(1, 0, 1);
        libm::hypot(c0, c1)
    }))
}

/// The log-factor f with det T = e^{4f}, i.e. T = e^{2f}δ when T is conformal.
pub fn conformal_factor(t: &SymTensor2Field) -> Result<ScalarField> {
    let chart = t.chart().clone();
    Field::try_from_nodes(&chart, |n| {
        let d = t.get(n).det();
        if d <= 0.0 {
            return Err(Error::DegenerateMetric { node: n });
        }
        Ok(0.25 * libm::log(d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Boundary;

    fn unit_rect(n: usize) -> Arc<GridChart> {
        Arc::new(GridChart::rect(n, n, [-0.5, 0.5], [-0.5, 0.5]).unwrap())
    }

    #[test]
    fn conformal_hessian_with_zero_factor_is_flat_hessian() {
        let c = unit_rect(21);
        let v = Field::from_fn(&c, |z| libm::sin(z.re) * libm::cos(2.0 * z.im));
        let flat = ConformalMetric::flat(Field::constant(&c, 0.0));
        let a = hessian_conformal(&flat, &v).unwrap();
        let b = fd_hessian_flat(&v).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn conformal_hessian_substitution_example() {
        let c = unit_rect(11);
        let h = ConformalMetric::flat(Field::from_fn(&c, |z| z.re));
        let v = Field::from_fn(&c, |z| z.im);
        let hess = hessian_conformal(&h, &v).unwrap();
        for n in c.active_nodes() {
            let t = hess.get(n);
            assert!(t.xx.abs() < 1e-12 && (t.xy + 1.0).abs() < 1e-12 && t.yy.abs() < 1e-12);
        }
    }

    #[test]
    fn general_hessian_matches_conformal_closed_form() {
        let c = unit_rect(81);
        let w = Field::from_fn(&c, |z| 0.3 * libm::sin(z.re + 2.0 * z.im));
        let h = ConformalMetric::flat(w);
        let v = Field::from_fn(&c, |z| libm::cos(z.re) * z.im);
        let a = hessian_conformal(&h, &v).unwrap();
        let b = hessian_metric(&h.tensor(), &v).unwrap();
        assert!(a.sup_diff(&b, 1).unwrap() < 1e-3);
    }

    #[test]
    fn rebase_is_exact() {
        let c = Arc::new(GridChart::rect(11, 11, [-0.5, 0.5], [-0.5, 0.5]).unwrap());
        let h = ConformalMetric::of_base(&c, BaseMetric::DiskHyperbolic).unwrap();
        let back = h.rebase(BaseMetric::Spherical).unwrap().rebase(BaseMetric::DiskHyperbolic).unwrap();
        assert!(back.u().sup_norm(0) < 1e-15);
    }

    #[test]
    fn disk_base_rejects_outside_nodes() {
        let c = Arc::new(GridChart::rect(11, 11, [-1.0, 1.0], [-1.0, 1.0]).unwrap());
        assert!(ConformalMetric::of_base(&c, BaseMetric::DiskHyperbolic).is_err());
        let t = GridChart::new(6, 6, 0.0, 0.0, 0.1, 0.1, [Boundary::Periodic; 2]).unwrap();
        assert!(ConformalMetric::of_base(&Arc::new(t), BaseMetric::DiskHyperbolic).is_ok());
    }
}
