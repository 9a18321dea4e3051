//! Linear Weingarten surfaces aK_e + bH + c = 0: residuals on surfaces and
//! on data at infinity, and a Newton solver for the Monge-Ampère equation
//! satisfied by the conformal factor u of e^{2u}I*.

pub mod sparse;

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::stencil::{self, Tap};
use crate::calculus::{
    conformal_factor, fd_gradient, fd_hessian_flat, ConformalMetric, Field, GridChart, OperatorField, ScalarField,
    SymTensor2Field,
};
use crate::epstein::{
    admissibility_residuals, data_at_infinity, epstein_surface, fundamental_forms, htame_check_with_margin,
    InfinityData, SurfaceData, FORM_MARGIN,
};
use crate::linalg::{Mat2, Sym2};
use crate::schwarzian::bbar_tensor;
use crate::{Error, Result};

use sparse::{gmres, CsrMatrix, Ilu0};

/// Coefficients of aK_e + bH + c = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeingartenCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Named special cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeingartenTag {
    Minimal,
    Cmc1,
    /// K_e = k.
    ConstantKe(f64),
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    /// b² − 4ac > 0.
    pub elliptic: bool,
    /// (c − a)(a − b + c) ≤ 0.
    pub sign_ok: bool,
    /// a − b + c = 0.
    pub degenerate_front: bool,
    /// a + b + c = 0, the degenerate case for the opposite orientation.
    pub degenerate_front_flipped: bool,
    pub tag: WeingartenTag,
}

impl WeingartenCoeffs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || (a == 0.0 && b == 0.0 && c == 0.0) {
            return Err(Error::InvalidInput("Weingarten coefficients must be finite and not all zero"));
        }
        Ok(WeingartenCoeffs { a, b, c })
    }

    pub const MINIMAL: WeingartenCoeffs = WeingartenCoeffs { a: 0.0, b: 1.0, c: 0.0 };

    /// a − b + c.
    pub fn alpha(&self) -> f64 {
        self.a - self.b + self.c
    }

    /// b² − 4ac.
    pub fn beta(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn classify(&self) -> Classification {
        let WeingartenCoeffs { a, b, c } = *self;
        let tag = if a == 0.0 && c == 0.0 {
            WeingartenTag::Minimal
        } else if a == 0.0 && b == c {
            WeingartenTag::Cmc1
        } else if b == 0.0 && a != 0.0 {
            WeingartenTag::ConstantKe(-c / a)
        } else {
            WeingartenTag::Generic
        };
        Classification {
            elliptic: self.beta() > 0.0,
            sign_ok: (c - a) * self.alpha() <= 0.0,
            degenerate_front: self.alpha() == 0.0,
            degenerate_front_flipped: a + b + c == 0.0,
            tag,
        }
    }
}

/// a det B + b tr(B)/2 + c.
pub fn weingarten_residual_surface(d: &SurfaceData, co: &WeingartenCoeffs) -> ScalarField {
    d.b.map(|b| co.a * b.det() + co.b * 0.5 * b.trace() + co.c)
}

/// det((a−b+c)B* + (c−a)E) − (b² − 4ac).
pub fn weingarten_residual_infinity(inf: &InfinityData, co: &WeingartenCoeffs) -> Result<ScalarField> {
    if co.alpha() == 0.0 {
        return Err(Error::DegenerateFrontCoefficients);
    }
    Ok(inf.bstar.map(|b| (b * co.alpha() + Mat2::scalar(co.c - co.a)).det() - co.beta()))
}

/// tr(B*) + 2, the reduced equation when a − b + c = 0.
pub fn cmc1_residual(inf: &InfinityData) -> ScalarField {
    inf.bstar.map(|b| b.trace() + 2.0)
}

/// (det B, tr B) from B* through the dictionary B = (E+B*)⁻¹(E−B*) in
/// closed form.
pub fn det_trace_from_bstar(bstar: &Mat2) -> Result<(f64, f64)> {
    let (d, t) = (bstar.det(), bstar.trace());
    let den = d + t + 1.0;
    if den.abs() < 1e-14 {
        return Err(Error::SingularDictionary { node: 0 });
    }
    Ok(((d - t + 1.0) / den, 2.0 * (1.0 - d) / den))
}

/// Monge-Ampère problem for u on a base (I*, II*) with conformal I*.
#[derive(Clone, Debug)]
pub struct MaProblem {
    base: InfinityData,
    coeffs: WeingartenCoeffs,
    /// log-factor f of I* = e^{2f}|dz|².
    f: ScalarField,
    /// Values of u on the fixed margin of a Dirichlet chart.
    boundary: Option<ScalarField>,
    admissibility: (f64, f64),
}

/// Depth of the Dirichlet margin on which u is prescribed.
pub const DIRICHLET_MARGIN: u32 = 2;

impl MaProblem {
    /// Checks that I* is conformal to |dz|², that a − b + c ≠ 0 and that
    /// both admissibility residuals of the base are below `tol`.
    pub fn new(
        base: InfinityData,
        coeffs: WeingartenCoeffs,
        boundary: Option<ScalarField>,
        tol: f64,
    ) -> Result<Self> {
        let p = Self::new_unchecked(base, coeffs, boundary)?;
        let (codazzi, gauss) = p.admissibility;
        if !(codazzi <= tol && gauss <= tol) {
            return Err(Error::BaseNotAdmissible { codazzi, gauss });
        }
        Ok(p)
    }

    /// As [`MaProblem::new`] without the admissibility gate (the residuals
    /// are still measured and reported).
    pub fn new_unchecked(base: InfinityData, coeffs: WeingartenCoeffs, boundary: Option<ScalarField>) -> Result<Self> {
        if coeffs.alpha() == 0.0 {
            return Err(Error::DegenerateFrontCoefficients);
        }
        let chart = base.chart().clone();
        let f = conformal_factor(&base.istar)?;
        for n in chart.active_nodes() {
            let g = base.istar.get(n);
            let s = 0.5 * g.trace();
            if (g.xx - g.yy).abs() > 1e-9 * s || g.xy.abs() > 1e-9 * s {
                return Err(Error::InvalidInput("I* must be conformal to |dz|^2"));
            }
        }
        let dirichlet = chart.boundary().contains(&crate::calculus::Boundary::Dirichlet)
            || chart.active_nodes().any(|n| chart.depth(n) == 0);
        match (&boundary, dirichlet) {
            (None, true) => return Err(Error::InvalidInput("Dirichlet chart needs boundary values")),
            (Some(b), _) => b.check_chart(&chart)?,
            _ => {}
        }
        let admissibility = admissibility_residuals(&base)?;
        Ok(MaProblem { base, coeffs, f, boundary, admissibility })
    }

    pub fn base(&self) -> &InfinityData {
        &self.base
    }

    pub fn coeffs(&self) -> &WeingartenCoeffs {
        &self.coeffs
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        self.base.chart()
    }

    pub fn boundary(&self) -> Option<&ScalarField> {
        self.boundary.as_ref()
    }

    /// (Codazzi, Gauss) residuals of the base.
    pub fn admissibility(&self) -> (f64, f64) {
        self.admissibility
    }

    /// Nodes carrying unknowns: all active nodes on periodic charts, nodes
    /// at depth ≥ 2 otherwise.
    pub fn unknown_nodes(&self) -> Vec<usize> {
        let chart = self.chart();
        match self.boundary {
            Some(_) => chart.nodes_with_margin(DIRICHLET_MARGIN).collect(),
            None => chart.active_nodes().collect(),
        }
    }

    /// Constant solving the equation with B* replaced by its average.
    pub fn default_initial_guess(&self) -> f64 {
        let chart = self.chart();
        let (mut t, mut d, mut k) = (0.0, 0.0, 0.0);
        for n in chart.active_nodes() {
            let b = self.base.bstar.get(n);
            t += b.trace();
            d += b.det();
            k += 1.0;
        }
        let (t, d) = (t / k, d / k);
        let co = &self.coeffs;
        // (a+b+c)μ² + (c−a)t̄μ + (a−b+c)d̄ = 0 with μ = e^{2u}
        let (qa, qb, qc) = (co.a + co.b + co.c, (co.c - co.a) * t, co.alpha() * d);
        let mu = if qa.abs() < 1e-14 {
            if qb != 0.0 { -qc / qb } else { 1.0 }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                1.0
            } else {
                let s = libm::sqrt(disc);
                let r1 = (-qb + s) / (2.0 * qa);
                let r2 = (-qb - s) / (2.0 * qa);
                r1.max(r2)
            }
        };
        if mu > 0.0 {
            0.5 * libm::log(mu)
        } else {
            0.0
        }
    }
}

/// Hess_{I*}u − du⊗du + ½|du|²δ with plain second-order stencils, the form
/// the Newton Jacobian differentiates exactly.
fn bbar_plain(f: &ScalarField, u: &ScalarField) -> Result<SymTensor2Field> {
    let df = fd_gradient(f)?;
    let du = fd_gradient(u)?;
    let hess = fd_hessian_flat(u)?;
    Ok(Field::from_nodes(u.chart(), |n| {
        let (fx, fy) = (df.get(n)[0], df.get(n)[1]);
        let (ux, uy) = (du.get(n)[0], du.get(n)[1]);
        let h = hess.get(n);
        let half = 0.5 * (ux * ux + uy * uy);
        Sym2::new(
            h.xx - fx * ux + fy * uy - ux * ux + half,
            h.xy - (fx * uy + fy * ux) - ux * uy,
            h.yy + fx * ux - fy * uy - uy * uy + half,
        )
    }))
}

/// M = (a−b+c)(II* + B̄(I*, e^{2u}I*)) + (c−a)e^{2u}I* at every node.
fn ma_tensor(u: &ScalarField, p: &MaProblem) -> Result<SymTensor2Field> {
    u.check_chart(p.chart())?;
    let h = bbar_plain(&p.f, u)?;
    let co = p.coeffs;
    Ok(Field::from_nodes(p.chart(), |n| {
        (p.base.iistar.get(n) + h.get(n)) * co.alpha()
            + p.base.istar.get(n) * ((co.c - co.a) * libm::exp(2.0 * u.get(n)))
    }))
}

/// det_{I*}(M) − (b² − 4ac)e^{4u}, the tensor form of the equation.
pub fn ma_residual(u: &ScalarField, p: &MaProblem) -> Result<ScalarField> {
    let m = ma_tensor(u, p)?;
    let co = p.coeffs;
    Ok(Field::from_nodes(p.chart(), |n| {
        m.get(n).raise(&p.base.istar.get(n)).det() - co.beta() * libm::exp(4.0 * u.get(n))
    }))
}

/// det((a−b+c)(B* + (I*)⁻¹B̄) + (c−a)e^{2u}E) − (b² − 4ac)e^{4u}, the
/// operator form of the same equation.
pub fn ma_residual_operator_form(u: &ScalarField, p: &MaProblem) -> Result<ScalarField> {
    let h = bbar_plain(&p.f, u)?;
    let co = p.coeffs;
    Ok(Field::from_nodes(p.chart(), |n| {
        let g = p.base.istar.get(n);
        let op = (p.base.bstar.get(n) + h.get(n).raise(&g)) * co.alpha()
            + Mat2::scalar((co.c - co.a) * libm::exp(2.0 * u.get(n)));
        op.det() - co.beta() * libm::exp(4.0 * u.get(n))
    }))
}

/// min over unknown nodes of the smallest eigenvalue of
/// (I*)⁻¹(II* + B̄(I*, e^{2u}I*)).
pub fn positivity_certificate(u: &ScalarField, p: &MaProblem) -> Result<f64> {
    let h = bbar_plain(&p.f, u)?;
    Ok(p
        .unknown_nodes()
        .into_iter()
        .map(|n| {
            let g = p.base.istar.get(n);
            let t = p.base.iistar.get(n) + h.get(n);
            t.eigenvalues().0 / (0.5 * g.trace())
        })
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug)]
pub struct NewtonConfig {
    /// Stop once the sup-residual over unknown nodes is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Backtracking line search (halving) when a full step does not
    /// decrease the residual.
    pub damping: bool,
    pub initial: Option<ScalarField>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-10, max_iter: 30, damping: true, initial: None }
    }
}

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Debug)]
pub struct MaSolution {
    pub u: ScalarField,
    /// Sup-residual before the first step and after each step.
    pub newton_trace: Vec<f64>,
    pub positivity_certificate: f64,
    /// The linearization had a constant kernel and updates were projected
    /// to zero mean.
    pub kernel_pinned: bool,
}

impl MaSolution {
    pub fn final_residual(&self) -> f64 {
        *self.newton_trace.last().unwrap_or(&f64::INFINITY)
    }

    /// max r_{k+1}/r_k² over consecutive steps with r_k < `below` and
    /// r_{k+1} > `floor` (steps landing on the round-off floor say nothing
    /// about the rate).
    pub fn quadratic_constant(&self, below: f64, floor: f64) -> Option<f64> {
        self.newton_trace
            .windows(2)
            .filter(|w| w[0] < below && w[1] > floor)
            .map(|w| w[1] / (w[0] * w[0]))
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

fn sup_over(r: &ScalarField, nodes: &[usize]) -> f64 {
    nodes.iter().map(|&n| r.get(n).abs()).fold(0.0, f64::max)
}

/// Exact Jacobian of the discrete residual restricted to the unknowns.
fn jacobian(u: &ScalarField, p: &MaProblem, nodes: &[usize], slot: &[usize]) -> Result<CsrMatrix> {
    let chart = p.chart();
    let m = ma_tensor(u, p)?;
    let df = fd_gradient(&p.f)?;
    let du = fd_gradient(u)?;
    let co = p.coeffs;
    let al = co.alpha();
    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(nodes.len() * 14);
    let push = |row: usize, taps: &[Tap], w: f64, t: &mut Vec<(usize, usize, f64)>| {
        for tap in taps {
            let col = slot[tap.node];
            if col != usize::MAX {
                t.push((row, col, w * tap.weight));
            }
        }
    };
    for (row, &n) in nodes.iter().enumerate() {
        let mm = m.get(n);
        let ef = libm::exp(2.0 * p.f.get(n));
        let d = ef * ef;
        let (fx, fy) = (df.get(n)[0], df.get(n)[1]);
        let (ux, uy) = (du.get(n)[0], du.get(n)[1]);
        let gxx = al * mm.yy / d;
        let gyy = al * mm.xx / d;
        let gxy = -2.0 * al * mm.xy / d;
        let gx = al * (mm.yy * (-fx - ux) + mm.xx * (fx + ux) - 2.0 * mm.xy * (-fy - uy)) / d;
        let gy = al * (mm.yy * (fy + uy) + mm.xx * (-fy - uy) - 2.0 * mm.xy * (-fx - ux)) / d;
        let e2u = libm::exp(2.0 * u.get(n));
        let g0 = 2.0 * (co.c - co.a) * e2u * ef * (mm.xx + mm.yy) / d - 4.0 * co.beta() * e2u * e2u;
        push(row, stencil::second(chart, n, 0)?.taps(), gxx, &mut t);
        push(row, stencil::second(chart, n, 1)?.taps(), gyy, &mut t);
        push(row, &stencil::mixed(chart, n)?, gxy, &mut t);
        push(row, stencil::first(chart, n, 0)?.taps(), gx, &mut t);
        push(row, stencil::first(chart, n, 1)?.taps(), gy, &mut t);
        t.push((row, row, g0));
    }
    Ok(CsrMatrix::from_triplets(nodes.len(), t))
}

/// Solves Δu = 0 on the unknown nodes with the values of `b` elsewhere, so
/// a Dirichlet start has no kinks along the fixed margin.
fn harmonic_extension(b: &ScalarField, nodes: &[usize], slot: &[usize]) -> Result<ScalarField> {
    let chart = b.chart().clone();
    let mut t = Vec::with_capacity(nodes.len() * 6);
    let mut rhs = vec![0.0; nodes.len()];
    for (row, &n) in nodes.iter().enumerate() {
        for axis in 0..2 {
            for tap in stencil::second(&chart, n, axis)?.taps() {
                match slot[tap.node] {
                    usize::MAX => rhs[row] -= tap.weight * b.get(tap.node),
                    col => t.push((row, col, tap.weight)),
                }
            }
        }
    }
    let a = CsrMatrix::from_triplets(nodes.len(), t);
    let pre = Ilu0::new(&a)?;
    let (x, stats) = gmres(&a, &rhs, &pre, 60, 3000, 1e-12, &|_| {})?;
    if !(stats.relative_residual < 1e-8) {
        return Err(Error::LinearSolveFailed { residual: stats.relative_residual });
    }
    let mut v = b.values().to_vec();
    for (k, &n) in nodes.iter().enumerate() {
        v[n] = x[k];
    }
    Field::new(chart, v)
}

/// Damped Newton for the Monge-Ampère equation with an exact Jacobian and
/// ILU(0)-preconditioned GMRES inner solves.
pub fn ma_newton_solve(p: &MaProblem, cfg: &NewtonConfig) -> Result<MaSolution> {
    if !p.coeffs.classify().elliptic {
        return Err(Error::NotElliptic);
    }
    let chart = p.chart().clone();
    let nodes = p.unknown_nodes();
    let mut slot = vec![usize::MAX; chart.len()];
    for (k, &n) in nodes.iter().enumerate() {
        slot[n] = k;
    }
    let mut u = match (&cfg.initial, &p.boundary) {
        (Some(u0), _) => {
            u0.check_chart(&chart)?;
            let mut v = u0.values().to_vec();
            if let Some(b) = &p.boundary {
                for n in chart.active_nodes() {
                    if slot[n] == usize::MAX {
                        v[n] = b.get(n);
                    }
                }
            }
            Field::new(chart.clone(), v)?
        }
        (None, Some(b)) => harmonic_extension(b, &nodes, &slot)?,
        (None, None) => Field::constant(&chart, p.default_initial_guess()),
    };
    let mut res = ma_residual(&u, p)?;
    let mut r = sup_over(&res, &nodes);
    let mut trace = vec![r];
    let mut pinned = false;
    let mut iter = 0;
    while r >= cfg.tol {
        if iter == cfg.max_iter || !r.is_finite() {
            return Err(Error::NewtonDiverged { trace });
        }
        iter += 1;
        let j = jacobian(&u, p, &nodes, &slot)?;
        let ones = vec![1.0; nodes.len()];
        let mut j1 = vec![0.0; nodes.len()];
        j.mul_vec(&ones, &mut j1);
        let kernel = p.boundary.is_none() && j1.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10 * j.norm_inf();
        pinned |= kernel;
        let rhs: Vec<f64> = nodes.iter().map(|&n| -res.get(n)).collect();
        let pre = Ilu0::new(&j)?;
        let project = move |v: &mut [f64]| {
            if kernel {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter_mut().for_each(|x| *x -= mean);
            }
        };
        let (delta, stats) = gmres(&j, &rhs, &pre, 60, 3000, 1e-12, &project)?;
        if !(stats.relative_residual < 1e-10) {
            return Err(Error::LinearSolveFailed { residual: stats.relative_residual });
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut v = u.values().to_vec();
            for (k, &n) in nodes.iter().enumerate() {
                v[n] += step * delta[k];
            }
            let trial = Field::new(chart.clone(), v)?;
            let tres = ma_residual(&trial, p)?;
            let tr = sup_over(&tres, &nodes);
            if tr.is_finite() && (tr < r || !cfg.damping) {
                u = trial;
                res = tres;
                r = tr;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trace.push(r);
        if !accepted {
            return Err(Error::NewtonDiverged { trace });
        }
    }
    let positivity_certificate = positivity_certificate(&u, p)?;
    let sol = MaSolution { u, newton_trace: trace, positivity_certificate, kernel_pinned: pinned };
    if !(positivity_certificate > 0.0) {
        return Err(Error::PositivityLost(Box::new(sol)));
    }
    Ok(sol)
}

/// Closing the loop on a solution through the Epstein surface of e^{2u}I*.
#[derive(Clone, Copy, Debug)]
pub struct GeometricReport {
    /// sup |aK_e + bH + c| on the reconstructed surface.
    pub weingarten_sup: f64,
    /// sup |H|.
    pub mean_curvature_sup: f64,
    /// sup |K_e − k| for constant-K_e coefficients, else NaN.
    pub ke_defect_sup: f64,
    /// 1 − max |principal curvature|; positive iff h-tame.
    pub tame_margin: f64,
    /// sup |II* − B̄(|dz|², I*)|: how far the base is from the chart's own
    /// Epstein data, in which case the reconstructed surface does not
    /// carry the base II*.
    pub projective_defect: f64,
}

pub fn verify_solution_geometrically(sol: &MaSolution, p: &MaProblem) -> Result<GeometricReport> {
    let chart = p.chart().clone();
    let h = ConformalMetric::flat(p.f.zip_map(&sol.u, |a, b| a + b)?);
    let surface = epstein_surface(&h)?;
    let d = fundamental_forms(&surface)?;
    let margin = match p.boundary {
        Some(_) => FORM_MARGIN + DIRICHLET_MARGIN,
        None => FORM_MARGIN,
    };
    let sup = |f: &ScalarField| chart.nodes_with_margin(margin).map(|n| f.get(n).abs()).fold(0.0, f64::max);
    let w = weingarten_residual_surface(&d, &p.coeffs);
    let hm = d.b.map(|b| 0.5 * b.trace());
    let ke_defect_sup = match p.coeffs.classify().tag {
        WeingartenTag::ConstantKe(k) => sup(&d.b.map(|b| b.det() - k)),
        _ => f64::NAN,
    };
    let flat = ConformalMetric::flat(Field::constant(&chart, 0.0));
    let own = bbar_tensor(&flat, &p.f)?;
    Ok(GeometricReport {
        weingarten_sup: sup(&w),
        mean_curvature_sup: sup(&hm),
        ke_defect_sup,
        tame_margin: htame_check_with_margin(&d, margin).margin,
        projective_defect: p.base.iistar.sup_diff(&own, margin)?,
    })
}

/// Data at infinity of the reconstructed surface, for cross-checks of the
/// residual at infinity on solver output.
pub fn reconstructed_infinity_data(sol: &MaSolution, p: &MaProblem) -> Result<InfinityData> {
    let h = ConformalMetric::flat(p.f.zip_map(&sol.u, |a, b| a + b)?);
    data_at_infinity(&fundamental_forms(&epstein_surface(&h)?)?)
}

/// Per-node (det B, tr B) from B* via [`det_trace_from_bstar`].
pub fn det_trace_field(bstar: &OperatorField) -> Result<Field<(f64, f64)>> {
    Field::try_from_nodes(bstar.chart(), |n| det_trace_from_bstar(&bstar.get(n)))
}
