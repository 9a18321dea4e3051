//! Epstein surfaces: envelopes of the horospheres of a conformal metric,
//! their fundamental forms, and the data at infinity (I*, II*).

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::calculus::{
    codazzi_residual, conformal_factor, fd_derivative_lifted, gauss_curvature, ComplexField, ConformalMetric, Field,
    GridChart, OperatorField, ScalarField, SymTensor2Field,
};
use crate::linalg::{Mat2, Sym2};
use crate::minkowski::{
    boundary_point, deck_lift, horosphere_solve, mink_inner, Branch, HyperboloidPoint, LightConeSection, MinkVec,
    INCIDENCE,
};
use crate::schwarzian::bbar_tensor;
use crate::{Error, Result};

/// Depth margin for sup-norms of quantities built from first derivatives of
/// the surface (second derivatives of u).
pub const FORM_MARGIN: u32 = 2;
/// Depth margin for quantities that differentiate the forms once more.
pub const CURVATURE_MARGIN: u32 = 3;

const DICTIONARY_EPS: f64 = 1e-12;

/// Grid map into H³ with a unit normal field.
#[derive(Clone, Debug)]
pub struct EmbeddedSurface {
    chart: Arc<GridChart>,
    points: Vec<MinkVec>,
    normals: Vec<MinkVec>,
    flipped: bool,
    /// For Epstein surfaces, (∂ₓσ, ∂ᵧσ) of the generating section, used to
    /// differentiate N = σ/c₀ − x without differencing N itself.
    sigma_frame: Option<Vec<[MinkVec; 2]>>,
}

impl EmbeddedSurface {
    /// A surface from explicit points and normals.
    pub fn new(chart: Arc<GridChart>, points: Vec<HyperboloidPoint>, normals: Vec<MinkVec>) -> Result<Self> {
        if points.len() != chart.len() || normals.len() != chart.len() {
            return Err(Error::InvalidInput("point count does not match chart size"));
        }
        for n in chart.active_nodes() {
            let x = points[n].vec();
            let nn = &normals[n];
            if (mink_inner(nn, nn) - 1.0).abs() > 1e-8 || mink_inner(nn, &x).abs() > 1e-8 * (1.0 + x.0[0]) {
                return Err(Error::InvalidInput("normal is not a unit vector tangent to H³"));
            }
        }
        Ok(EmbeddedSurface {
            chart,
            points: points.into_iter().map(|p| p.vec()).collect(),
            normals,
            flipped: false,
            sigma_frame: None,
        })
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        &self.chart
    }

    pub fn points(&self) -> &[MinkVec] {
        &self.points
    }

    pub fn normals(&self) -> &[MinkVec] {
        &self.normals
    }

    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    /// Same surface with N → −N (so B → −B).
    pub fn flipped(&self) -> Self {
        EmbeddedSurface {
            chart: self.chart.clone(),
            points: self.points.clone(),
            normals: self.normals.iter().map(|v| -*v).collect(),
            flipped: !self.flipped,
            sigma_frame: self.sigma_frame.clone(),
        }
    }

    pub fn point(&self, node: usize) -> HyperboloidPoint {
        HyperboloidPoint::new(self.points[node]).unwrap_or(HyperboloidPoint::BASEPOINT)
    }

    fn tangent_frame(&self) -> Result<[Field<MinkVec>; 2]> {
        let x = Field::new(self.chart.clone(), self.points.clone())?;
        let lift = deck_lift(&self.chart);
        Ok([fd_derivative_lifted(&x, 0, &lift)?, fd_derivative_lifted(&x, 1, &lift)?])
    }

    fn normal_frame(&self, dx: &[Field<MinkVec>; 2]) -> Result<[Field<MinkVec>; 2]> {
        match &self.sigma_frame {
            Some(frame) => {
                let sign = if self.flipped { -1.0 } else { 1.0 };
                let make = |k: usize| {
                    Field::from_nodes(&self.chart, |n| (frame[n][k] * (1.0 / INCIDENCE) - dx[k].get(n)) * sign)
                };
                Ok([make(0), make(1)])
            }
            None => {
                let nf = Field::new(self.chart.clone(), self.normals.clone())?;
                let lift = deck_lift(&self.chart);
                Ok([fd_derivative_lifted(&nf, 0, &lift)?, fd_derivative_lifted(&nf, 1, &lift)?])
            }
        }
    }
}

/// Epstein surface of `h`: per node, the envelope point of the horosphere
/// family σ = e^{u}ℓ, with N = σ/c₀ − x pointing to the base point z.
pub fn epstein_surface(h: &ConformalMetric) -> Result<EmbeddedSurface> {
    let sec = LightConeSection::from_metric(h);
    let frame = sec.frame()?;
    let chart = sec.chart().clone();
    let mut points = Vec::with_capacity(chart.len());
    let mut normals = Vec::with_capacity(chart.len());
    let mut bad = Vec::new();
    for n in 0..chart.len() {
        if !chart.is_active(n) {
            points.push(MinkVec::default());
            normals.push(MinkVec::default());
            continue;
        }
        let s = sec.values()[n];
        match horosphere_solve(&s, &frame[n][0], &frame[n][1], Branch::Near) {
            Ok(x) => {
                points.push(x.vec());
                normals.push(s * (1.0 / INCIDENCE) - x.vec());
            }
            Err(Error::DegenerateFrame | Error::NoRealRoot) => {
                bad.push(n);
                points.push(MinkVec::new(1.0, 0.0, 0.0, 0.0));
                normals.push(MinkVec::new(0.0, 0.0, 0.0, 1.0));
            }
            Err(e) => return Err(e),
        }
    }
    let surface = EmbeddedSurface { chart: chart.clone(), points, normals, flipped: false, sigma_frame: Some(frame) };
    if bad.is_empty() {
        let dx = surface.tangent_frame()?;
        for n in chart.active_nodes() {
            let a = dx[0].get(n);
            let b = dx[1].get(n);
            let (aa, ab, bb) = (mink_inner(&a, &a), mink_inner(&a, &b), mink_inner(&b, &b));
            if aa * bb - ab * ab <= 1e-12 * (aa + bb) * (aa + bb) {
                bad.push(n);
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::SingularEnvelope { nodes: bad });
    }
    Ok(surface)
}

/// First, second and third fundamental forms and the shape operator.
#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub i: SymTensor2Field,
    pub ii: SymTensor2Field,
    pub iii: SymTensor2Field,
    pub b: OperatorField,
    /// max |⟨∂₁N,∂₂x⟩ − ⟨∂₂N,∂₁x⟩| removed by symmetrization.
    pub asymmetry: f64,
}

/// I = ⟨∂x,∂x⟩, II = ⟨∂N,∂x⟩ (symmetrized), B = I⁻¹II, III = I(B·,B·).
pub fn fundamental_forms(s: &EmbeddedSurface) -> Result<SurfaceData> {
    let chart = s.chart.clone();
    let dx = s.tangent_frame()?;
    let dn = s.normal_frame(&dx)?;
    let mut asym = 0.0f64;
    let mut i_vals = Vec::with_capacity(chart.len());
    let mut ii_vals = Vec::with_capacity(chart.len());
    for n in 0..chart.len() {
        if !chart.is_active(n) {
            i_vals.push(Sym2::ZERO);
            ii_vals.push(Sym2::ZERO);
            continue;
        }
        let x = [dx[0].get(n), dx[1].get(n)];
        let nv = [dn[0].get(n), dn[1].get(n)];
        let i = Sym2::new(mink_inner(&x[0], &x[0]), mink_inner(&x[0], &x[1]), mink_inner(&x[1], &x[1]));
        if i.det() <= 1e-14 * i.trace() * i.trace() {
            return Err(Error::DegenerateSurface { node: n });
        }
        // P[a][b] = ⟨∂_a N, ∂_b x⟩
        let p = Mat2::new(
            mink_inner(&nv[0], &x[0]),
            mink_inner(&nv[0], &x[1]),
            mink_inner(&nv[1], &x[0]),
            mink_inner(&nv[1], &x[1]),
        );
        if chart.depth(n) >= FORM_MARGIN {
            asym = asym.max(p.asymmetry());
        }
        i_vals.push(i);
        ii_vals.push(p.sym());
    }
    let i = Field::new(chart.clone(), i_vals)?;
    let ii = Field::new(chart.clone(), ii_vals)?;
    let b = Field::from_nodes(&chart, |n| ii.get(n).raise(&i.get(n)));
    let iii = Field::from_nodes(&chart, |n| {
        let bn = b.get(n);
        (ii.get(n).to_mat() * bn).sym()
    });
    Ok(SurfaceData { i, ii, iii, b, asymmetry: asym })
}

/// Boundary endpoint of the normal geodesic ray at each node.
pub fn hyperbolic_gauss_map(s: &EmbeddedSurface) -> ComplexField {
    Field::from_nodes(&s.chart, |n| boundary_point(&(s.points[n] + s.normals[n])))
}

/// Data at infinity (I*, II*) with B* = (I*)⁻¹II*.
#[derive(Clone, Debug)]
pub struct InfinityData {
    pub istar: SymTensor2Field,
    pub iistar: SymTensor2Field,
    pub bstar: OperatorField,
}

impl InfinityData {
    pub fn new(istar: SymTensor2Field, iistar: SymTensor2Field) -> Result<Self> {
        istar.check_chart(iistar.chart())?;
        let chart = istar.chart().clone();
        for n in chart.active_nodes() {
            if !istar.get(n).is_positive_definite() {
                return Err(Error::DegenerateMetric { node: n });
            }
        }
        let bstar = Field::from_nodes(&chart, |n| iistar.get(n).raise(&istar.get(n)));
        Ok(InfinityData { istar, iistar, bstar })
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        self.istar.chart()
    }

    /// III* = II*(I*)⁻¹II*.
    pub fn iiistar(&self) -> SymTensor2Field {
        Field::from_nodes(self.chart(), |n| (self.iistar.get(n).to_mat() * self.bstar.get(n)).sym())
    }

    /// I* as a conformal metric over the flat base (¼ log det I*).
    pub fn conformal_istar(&self) -> Result<ConformalMetric> {
        Ok(ConformalMetric::flat(conformal_factor(&self.istar)?))
    }
}

/// I* = ½(I + 2II + III), II* = ½(I − III), B* = (E+B)⁻¹(E−B).
pub fn data_at_infinity(d: &SurfaceData) -> Result<InfinityData> {
    let chart = d.i.chart().clone();
    let istar = Field::from_nodes(&chart, |n| (d.i.get(n) + d.ii.get(n) * 2.0 + d.iii.get(n)) * 0.5);
    let iistar = Field::from_nodes(&chart, |n| (d.i.get(n) - d.iii.get(n)) * 0.5);
    for n in chart.active_nodes() {
        if !istar.get(n).is_positive_definite() {
            return Err(Error::DegenerateMetric { node: n });
        }
    }
    let bstar = shape_at_infinity(&d.b)?;
    Ok(InfinityData { istar, iistar, bstar })
}

/// Data at infinity of the Epstein surface of `h` in closed form:
/// I* = h and II* = B̄(|dz|², h), the flat metric having II* = 0.
pub fn infinity_data_of_metric(h: &ConformalMetric) -> Result<InfinityData> {
    let chart = h.chart().clone();
    let f = h.flat_factor();
    let flat = ConformalMetric::flat(Field::constant(&chart, 0.0));
    let iistar = bbar_tensor(&flat, &f)?;
    InfinityData::new(h.tensor(), iistar)
}

/// B* = (E+B)⁻¹(E−B).
pub fn shape_at_infinity(b: &OperatorField) -> Result<OperatorField> {
    Field::try_from_nodes(b.chart(), |n| {
        let bn = b.get(n);
        let inv = (Mat2::IDENTITY + bn).inverse();
        match inv {
            Some(m) if (Mat2::IDENTITY + bn).det().abs() > DICTIONARY_EPS => Ok(m * (Mat2::IDENTITY - bn)),
            _ => Err(Error::EigenvalueMinusOne { node: n }),
        }
    })
}

/// B = (E+B*)⁻¹(E−B*).
pub fn b_from_bstar(bstar: &OperatorField) -> Result<OperatorField> {
    Field::try_from_nodes(bstar.chart(), |n| {
        let bn = bstar.get(n);
        let inv = (Mat2::IDENTITY + bn).inverse();
        match inv {
            Some(m) if (Mat2::IDENTITY + bn).det().abs() > DICTIONARY_EPS => Ok(m * (Mat2::IDENTITY - bn)),
            _ => Err(Error::SingularDictionary { node: n }),
        }
    })
}

/// Per-node h-tameness (principal curvatures in (−1, 1)).
#[derive(Clone, Debug)]
pub struct TameReport {
    pub tame: Field<bool>,
    /// min over nodes of 1 − max|λ(B)|; positive iff tame everywhere.
    pub margin: f64,
    pub all_tame: bool,
}

pub fn htame_check(d: &SurfaceData) -> TameReport {
    htame_check_with_margin(d, FORM_MARGIN)
}

/// As [`htame_check`], with the global verdict taken over nodes at depth
/// ≥ `margin`.
pub fn htame_check_with_margin(d: &SurfaceData, margin: u32) -> TameReport {
    let chart = d.b.chart().clone();
    let slack = Field::from_nodes(&chart, |n| {
        let (lo, hi) = d.b.get(n).real_eigenvalues();
        1.0 - lo.abs().max(hi.abs())
    });
    let tame = slack.map(|s| s > 0.0);
    let m = chart.nodes_with_margin(margin).map(|n| slack.get(n)).fold(f64::INFINITY, f64::min);
    TameReport { tame, margin: m, all_tame: m > 0.0 }
}

/// (sup Codazzi residual of II* for I*, sup |tr_{I*}II* + K*|).
pub fn admissibility_residuals(inf: &InfinityData) -> Result<(f64, f64)> {
    let g = inf.conformal_istar()?;
    let codazzi = codazzi_residual(&inf.iistar, &g)?.sup_norm(CURVATURE_MARGIN);
    let k = gauss_curvature(&g)?;
    let chart = inf.chart().clone();
    let gauss: ScalarField =
        Field::from_nodes(&chart, |n| inf.iistar.get(n).trace_with(&inf.istar.get(n)) + k.get(n));
    Ok((codazzi, gauss.sup_norm(CURVATURE_MARGIN)))
}

/// ½(e^{2r}I* + 2II* + e^{−2r}III*).
pub fn equidistant_metric(inf: &InfinityData, r: f64) -> Result<SymTensor2Field> {
    let iii = inf.iiistar();
    let (a, c) = (libm::exp(2.0 * r), libm::exp(-2.0 * r));
    Field::try_from_nodes(inf.chart(), |n| {
        let m = (inf.istar.get(n) * a + inf.iistar.get(n) * 2.0 + iii.get(n) * c) * 0.5;
        if m.is_positive_definite() {
            Ok(m)
        } else {
            Err(Error::DegenerateMetric { node: n })
        }
    })
}

/// Largest |G(z) − z| over nodes at depth ≥ `margin`.
pub fn gauss_map_defect(s: &EmbeddedSurface, margin: u32) -> f64 {
    let g = hyperbolic_gauss_map(s);
    let chart = s.chart();
    chart
        .nodes_with_margin(margin)
        .map(|n| (g.get(n) - chart.z(n)).norm())
        .fold(0.0, f64::max)
}

/// Hyperboloid and orthonormality residuals (max over active nodes).
pub fn frame_residual(s: &EmbeddedSurface) -> f64 {
    s.chart
        .active_nodes()
        .map(|n| {
            let x = &s.points[n];
            let nv = &s.normals[n];
            let scale = 1.0 + x.0[0] * x.0[0];
            ((mink_inner(x, x) + 1.0).abs() / scale)
                .max((mink_inner(nv, nv) - 1.0).abs() / scale)
                .max(mink_inner(x, nv).abs() / scale)
        })
        .fold(0.0, f64::max)
}
