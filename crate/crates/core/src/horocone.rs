//! Surfaces in the space of horospheres, seen as sections of the future
//! light cone, and their relation to Epstein data.

use alloc::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{
    conformal_factor, fd_derivative_lifted, gauss_curvature, hessian_conformal, traceless_part, BaseMetric, Boundary,
    ConformalMetric, Field, GridChart, OperatorField, ScalarField, SymTensor2Field,
};
use crate::epstein::{
    data_at_infinity, epstein_surface, fundamental_forms, InfinityData, CURVATURE_MARGIN, FORM_MARGIN,
};
use crate::linalg::Sym2;
use crate::minkowski::{deck_lift, mink_inner, LightConeSection, INCIDENCE};
use crate::schwarzian::{bbar_tensor, re_quadratic, HolomorphicMap};
use crate::{Error, Result};

/// Induced data (I*_c, II*_c, B*_c) of a section of the light cone.
#[derive(Clone, Debug)]
pub struct ConeSurfaceData {
    pub istar_c: SymTensor2Field,
    pub iistar_c: SymTensor2Field,
    pub bstar_c: OperatorField,
}

/// Pullback ⟨dσ, dσ⟩ by finite differences of σ.
pub fn cone_first_form(sec: &LightConeSection) -> Result<SymTensor2Field> {
    let chart = sec.chart().clone();
    let s = Field::new(chart.clone(), sec.values().to_vec())?;
    let lift = deck_lift(&chart);
    let sx = fd_derivative_lifted(&s, 0, &lift)?;
    let sy = fd_derivative_lifted(&s, 1, &lift)?;
    Ok(Field::from_nodes(&chart, |n| {
        let (a, b) = (sx.get(n), sy.get(n));
        Sym2::new(mink_inner(&a, &a), mink_inner(&a, &b), mink_inner(&b, &b))
    }))
}

/// II*_c of the section whose first form is `h`, from the spherical-base
/// closed form B̄(h_S, e^{2w}h_S) + ½(e^{2w} − 1)h_S with h = e^{2w}h_S.
pub fn cone_second_form(h: &ConformalMetric) -> Result<SymTensor2Field> {
    let s = h.rebase(BaseMetric::Spherical)?;
    let chart = s.chart().clone();
    let hs = ConformalMetric::of_base(&chart, BaseMetric::Spherical)?;
    let hs_t = hs.tensor();
    let w = s.u();
    let bbar = bbar_tensor(&hs, w)?;
    Ok(Field::from_nodes(&chart, |n| bbar.get(n) + hs_t.get(n) * (0.5 * (libm::exp(2.0 * w.get(n)) - 1.0))))
}

/// First variation of II*_c in the direction u̇: Hess_{I*_c} u̇ + u̇ I*_c.
pub fn cone_variation(u_dot: &ScalarField, istar_c: &ConformalMetric) -> Result<SymTensor2Field> {
    let hess = hessian_conformal(istar_c, u_dot)?;
    let g = istar_c.tensor();
    let gu = g.zip_map(u_dot, |t, v| t * v)?;
    hess.zip_map(&gu, |a, b| a + b)
}

/// The section of C³₊ dual to the Epstein surface of `h` is σ/c₀ with
/// σ = e^{u}ℓ, so its first form is 2h.
pub fn dual_section(h: &ConformalMetric) -> LightConeSection {
    LightConeSection::from_metric(h).scaled(1.0 / INCIDENCE)
}

/// Cone data of the section dual to the Epstein surface of `h`.
pub fn cone_data(h: &ConformalMetric) -> Result<ConeSurfaceData> {
    let istar_c = cone_first_form(&dual_section(h))?;
    let iistar_c = cone_second_form(&h.scaled(0.5 * core::f64::consts::LN_2))?;
    let chart = istar_c.chart().clone();
    for n in chart.active_nodes() {
        if !istar_c.get(n).is_positive_definite() {
            return Err(Error::DegenerateMetric { node: n });
        }
    }
    let bstar_c = Field::from_nodes(&chart, |n| iistar_c.get(n).raise(&istar_c.get(n)));
    Ok(ConeSurfaceData { istar_c, iistar_c, bstar_c })
}

/// (sup |I*_c − 2I*|, sup |II*_c − II* − I*|).
pub fn duality_check(inf: &InfinityData, cone: &ConeSurfaceData) -> Result<(f64, f64)> {
    inf.istar.check_chart(cone.istar_c.chart())?;
    let two = inf.istar.map(|t| t * 2.0);
    let sum = inf.iistar.zip_map(&inf.istar, |a, b| a + b)?;
    Ok((cone.istar_c.sup_diff(&two, FORM_MARGIN)?, cone.iistar_c.sup_diff(&sum, FORM_MARGIN)?))
}

/// Duality residuals for `h` through both pipelines: Epstein surface data
/// and cone data.
pub fn duality_residuals(h: &ConformalMetric) -> Result<(f64, f64)> {
    let inf = data_at_infinity(&fundamental_forms(&epstein_surface(h)?)?)?;
    duality_check(&inf, &cone_data(h)?)
}

/// sup |K(I*_c) − (1 − tr B*_c)|.
pub fn cone_gauss_residual(cone: &ConeSurfaceData) -> Result<f64> {
    let g = ConformalMetric::flat(conformal_factor(&cone.istar_c)?);
    let k = gauss_curvature(&g)?;
    let chart = k.chart().clone();
    let r: ScalarField = Field::from_nodes(&chart, |n| k.get(n) - (1.0 - cone.bstar_c.get(n).trace()));
    Ok(r.sup_norm(CURVATURE_MARGIN))
}

/// sup |II*_{e^{2u}h} − II*_h − B̄(h, e^{2u}h)| with both II* taken from
/// Epstein surfaces.
pub fn conformal_change_residual(h: &ConformalMetric, u: &ScalarField) -> Result<f64> {
    let before = data_at_infinity(&fundamental_forms(&epstein_surface(h)?)?)?;
    let after = data_at_infinity(&fundamental_forms(&epstein_surface(&h.conformal_change(u)?)?)?)?;
    let bbar = bbar_tensor(h, u)?;
    let predicted = before.iistar.zip_map(&bbar, |a, b| a + b)?;
    after.iistar.sup_diff(&predicted, FORM_MARGIN)
}

/// sup |II*_c' − II*_c − B̄(h, e^{2u}h) − ½(I*_c' − I*_c)| for the cone
/// data of h and e^{2u}h.
pub fn cone_conformal_change_residual(h: &ConformalMetric, u: &ScalarField) -> Result<f64> {
    let before = cone_data(h)?;
    let after = cone_data(&h.conformal_change(u)?)?;
    let bbar = bbar_tensor(h, u)?;
    let chart = h.chart().clone();
    let predicted = Field::from_nodes(&chart, |n| {
        before.iistar_c.get(n) + bbar.get(n) + (after.istar_c.get(n) - before.istar_c.get(n)) * 0.5
    });
    after.iistar_c.sup_diff(&predicted, FORM_MARGIN)
}

/// Simply connected domains with a closed-form uniformizer onto the disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniformizedDomain {
    /// |z| < 1 with the identity.
    Disk,
    /// 0 < Im z < π with (e^z − i)/(e^z + i).
    Strip,
    /// Im z > 0 with (z − i)/(z + i).
    HalfPlane,
}

impl UniformizedDomain {
    pub fn uniformizer(self) -> HolomorphicMap {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            UniformizedDomain::Disk => HolomorphicMap::mobius(one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), one),
            UniformizedDomain::Strip => HolomorphicMap::StripUniformizer,
            UniformizedDomain::HalfPlane => HolomorphicMap::mobius(one, -i, one, i),
        }
    }

    /// Test chart at spacing ≈ `dx`, kept away from the boundary of the
    /// domain. The strip chart is periodic in x, the metric being
    /// translation invariant there.
    pub fn chart(self, dx: f64) -> Result<GridChart> {
        let count = |len: f64| libm::round(len / dx) as usize + 1;
        match self {
            UniformizedDomain::Disk => {
                let n = count(0.8);
                GridChart::rect(n, n, [-0.4, 0.4], [-0.4, 0.4])
            }
            UniformizedDomain::Strip => {
                let (y0, y1) = (0.4, core::f64::consts::PI - 0.4);
                let ny = count(y1 - y0);
                let dy = (y1 - y0) / (ny - 1) as f64;
                GridChart::new(16, ny, 0.0, y0, dx, dy, [Boundary::Periodic, Boundary::Dirichlet])
            }
            UniformizedDomain::HalfPlane => {
                let nx = count(2.0);
                let ny = count(1.5);
                GridChart::rect(nx, ny, [-1.0, 1.0], [0.5, 2.0])
            }
        }
    }
}

/// Outcome of comparing II*₀ with Re S(φ).
#[derive(Clone, Copy, Debug)]
pub struct SchwarzianAtInfinity {
    /// sup |II*₀ − Re S(φ)|.
    pub residual: f64,
    /// sup |Re S(φ)|.
    pub reference: f64,
}

impl SchwarzianAtInfinity {
    /// Residual relative to the reference, or absolute when the reference
    /// vanishes.
    pub fn relative(&self) -> f64 {
        if self.reference > 0.0 {
            self.residual / self.reference
        } else {
            self.residual
        }
    }
}

/// Epstein data for I* = φ*(hyperbolic metric of the disk), then
/// II*₀ = (II*)₀ against Re S(φ).
pub fn schwarzian_at_infinity_check(domain: UniformizedDomain, dx: f64) -> Result<SchwarzianAtInfinity> {
    let chart = Arc::new(domain.chart(dx)?);
    let phi = domain.uniformizer();
    let jets = phi.jets(&chart)?;
    let disk = BaseMetric::DiskHyperbolic;
    let mut u = ScalarField::constant(&chart, 0.0);
    let mut u_vals = u.values().to_vec();
    for n in chart.active_nodes() {
        let j = jets[n];
        if j.d1().norm() < 1e-12 {
            return Err(Error::CriticalPoint { z: chart.z(n) });
        }
        if j.value().norm() >= 1.0 {
            return Err(Error::InvalidInput("uniformizer leaves the unit disk"));
        }
        u_vals[n] = libm::log(j.d1().norm()) + disk.log_factor(j.value());
    }
    u = Field::new(chart.clone(), u_vals)?;
    let h = ConformalMetric::flat(u);
    let inf = data_at_infinity(&fundamental_forms(&epstein_surface(&h)?)?)?;
    let ii0 = traceless_part(&inf.iistar, &inf.istar)?;
    let exact = Field::from_nodes(&chart, |n| re_quadratic(jets[n].schwarzian()));
    Ok(SchwarzianAtInfinity { residual: ii0.sup_diff(&exact, FORM_MARGIN)?, reference: exact.sup_norm(FORM_MARGIN) })
}
