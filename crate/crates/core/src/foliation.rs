//! Quadratic differentials, measured foliations on flat tori, extremal
//! length, and the pairing with Beltrami differentials.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::calculus::{tensor_pairing, ConformalMetric, Field, OperatorField, ScalarField};
use crate::linalg::Mat2;
use crate::schwarzian::QuadDiffField;
use crate::{Error, Result};

const ZERO_EPS: f64 = 1e-12;

/// Flat torus ℂ/(ℤ + τℤ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusModulus {
    tau: Complex64,
}

impl TorusModulus {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidInput("modulus needs Im tau > 0"));
        }
        Ok(TorusModulus { tau })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// τ ↦ (aτ + b)/(cτ + d) for `m` = [[a, b], [c, d]] in SL(2, ℤ).
    pub fn act(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        check_unimodular(m)?;
        let [[a, b], [c, d]] = m.map(|r| r.map(|v| Complex64::new(v as f64, 0.0)));
        Self::new((a * self.tau + b) / (c * self.tau + d))
    }
}

fn check_unimodular(m: [[i64; 2]; 2]) -> Result<()> {
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1 {
        return Err(Error::InvalidInput("marking change must have determinant 1"));
    }
    Ok(())
}

/// Q = A dz² on a flat torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusQuadDiff {
    pub a: Complex64,
}

/// Measured foliation by closed leaves parallel to p + qτ, with transverse
/// measure w times the standard one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFoliation {
    p: i64,
    q: i64,
    w: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl SlopeFoliation {
    pub fn new(p: i64, q: i64, w: f64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::InvalidInput("slope (p, q) must be coprime"));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput("weight must be positive"));
        }
        Ok(SlopeFoliation { p, q, w })
    }

    pub fn slope(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    pub fn weight(&self) -> f64 {
        self.w
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.p, self.q, self.w * factor)
    }

    /// The same foliation written in the basis (cτ + d, aτ + b) that goes
    /// with [`TorusModulus::act`].
    pub fn remarked(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        check_unimodular(m)?;
        let [[a, b], [c, d]] = m;
        // p + qτ = p'(cτ + d) + q'(aτ + b)
        Self::new(a * self.p - b * self.q, -c * self.p + d * self.q, self.w)
    }

    fn period(&self, tau: Complex64) -> Complex64 {
        Complex64::new(self.p as f64, 0.0) + tau * self.q as f64
    }
}

/// Angle θ of the horizontal direction: A e^{2iθ} > 0.
pub fn horizontal_direction(q: &TorusQuadDiff) -> Result<f64> {
    if q.a.norm() < ZERO_EPS {
        return Err(Error::ZeroDifferential { node: 0 });
    }
    Ok(-0.5 * q.a.arg())
}

/// Per-node horizontal angle of a quadratic differential field.
pub fn horizontal_direction_field(q: &QuadDiffField) -> Result<ScalarField> {
    let v = q.values();
    Field::try_from_nodes(v.chart(), |n| {
        let a = v.get(n);
        if a.norm() < ZERO_EPS {
            return Err(Error::ZeroDifferential { node: n });
        }
        Ok(-0.5 * a.arg())
    })
}

/// ∫|Q| over the torus: |A| Im τ.
pub fn extremal_length_torus(q: &TorusQuadDiff, tau: &TorusModulus) -> f64 {
    q.a.norm() * tau.tau.im
}

/// ∫|q| dx dy by the chart quadrature.
pub fn extremal_length_from_field(q: &QuadDiffField) -> f64 {
    q.values().map(|a| a.norm()).integrate()
}

/// The constant Q whose horizontal foliation is `f`:
/// A = w² conj(p + qτ)²/(Im τ)², so that ∫|Q| = w²|p + qτ|²/Im τ.
pub fn torus_foliation_q(f: &SlopeFoliation, tau: &TorusModulus) -> TorusQuadDiff {
    let om = f.period(tau.tau);
    let y = tau.tau.im;
    TorusQuadDiff { a: om.conj() * om.conj() * (f.w * f.w / (y * y)) }
}

/// ext(f) on the torus τ.
pub fn extremal_length(f: &SlopeFoliation, tau: &TorusModulus) -> f64 {
    extremal_length_torus(&torus_foliation_q(f, tau), tau)
}

/// Energy E_f = 2 ext(f).
pub fn energy(f: &SlopeFoliation, tau: &TorusModulus) -> f64 {
    2.0 * extremal_length(f, tau)
}

/// Beltrami differential of the affine deformation τ ↦ τ + εd, constant
/// on the torus.
pub fn affine_beltrami(tau: &TorusModulus, d: Complex64) -> Complex64 {
    Complex64::new(0.0, 1.0) * d / (2.0 * tau.tau.im)
}

/// |(E(τ+εd) − E(τ−εd))/2ε + 4 Re⟨Φ_f, μ_d⟩| with Φ_f = −Q_f.
pub fn gardiner_residual(f: &SlopeFoliation, tau: &TorusModulus, d: Complex64, eps: f64) -> Result<f64> {
    let plus = TorusModulus::new(tau.tau + d * eps).map_err(|_| Error::StepTooLarge)?;
    let minus = TorusModulus::new(tau.tau - d * eps).map_err(|_| Error::StepTooLarge)?;
    let lhs = (energy(f, &plus) - energy(f, &minus)) / (2.0 * eps);
    let phi = -torus_foliation_q(f, tau).a;
    let pairing = phi * affine_beltrami(tau, d) * tau.tau.im;
    Ok((lhs + 4.0 * pairing.re).abs())
}

/// Variation ḣ = h(u·,·) of a conformal metric h by a traceless,
/// h-self-adjoint operator field u.
#[derive(Clone, Debug)]
pub struct MetricVariation {
    u: OperatorField,
}

impl MetricVariation {
    pub fn new(u: OperatorField) -> Result<Self> {
        let chart = u.chart().clone();
        for n in chart.active_nodes() {
            let m = u.get(n);
            let s = 1.0 + m.max_abs();
            if m.trace().abs() > 1e-10 * s || m.asymmetry() > 1e-10 * s {
                return Err(Error::InvalidInput("variation must be traceless and self-adjoint"));
            }
        }
        Ok(MetricVariation { u })
    }

    pub fn operator(&self) -> &OperatorField {
        &self.u
    }
}

/// μ = (a + ib)/2 for u = (a b; b −a).
pub fn beltrami_from_operator(u: &Mat2) -> Complex64 {
    let a = 0.5 * (u.m[0][0] - u.m[1][1]);
    let b = 0.5 * (u.m[0][1] + u.m[1][0]);
    Complex64::new(a, b) * 0.5
}

pub fn beltrami_from_variation(hdot: &MetricVariation) -> Field<Complex64> {
    hdot.u.map(|m| beltrami_from_operator(&m))
}

/// Both sides of ∫⟨Re q, ḣ⟩_h da_h = factor · Re ∫ q μ.
#[derive(Clone, Copy, Debug)]
pub struct PairingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Pairing identity with the constant 4.
pub fn pairing_residual(q: &QuadDiffField, hdot: &MetricVariation, h: &ConformalMetric) -> Result<PairingReport> {
    pairing_with_factor(q, hdot, h, 4.0)
}

/// Pairing identity with an arbitrary constant in front of Re ∫ qμ.
pub fn pairing_with_factor(
    q: &QuadDiffField,
    hdot: &MetricVariation,
    h: &ConformalMetric,
    factor: f64,
) -> Result<PairingReport> {
    let chart = q.chart().clone();
    hdot.u.check_chart(&chart)?;
    let g = h.tensor();
    let hdot_t = Field::from_nodes(&chart, |n| hdot.u.get(n).lower(&g.get(n)));
    let req = q.real_part();
    let lhs = tensor_pairing(&req, &hdot_t, &g)?;
    let mu = beltrami_from_variation(hdot);
    let qmu: ScalarField = Field::from_nodes(&chart, |n| (q.values().get(n) * mu.get(n)).re);
    let rhs = factor * qmu.integrate();
    Ok(PairingReport { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Comparison of ∫|q| with (3/2) of the hyperbolic area.
#[derive(Clone, Copy, Debug)]
pub struct NehariCertificate {
    /// ∫|q| dx dy.
    pub ext: f64,
    /// hyperbolic area of the evaluated region.
    pub area: f64,
    /// sup |q|/ρ.
    pub pointwise_ratio: f64,
    /// (3/2)·area − ext.
    pub margin: f64,
    pub pass: bool,
}

/// Integrals over the nodes with |z| ≤ 1 − 5dx; `hyp` supplies ρ.
pub fn nehari_ext_certificate(q: &QuadDiffField, hyp: &ConformalMetric) -> Result<NehariCertificate> {
    let chart = q.chart().clone();
    let rho = hyp.tensor();
    rho.check_chart(&chart)?;
    let rim = 1.0 - 5.0 * chart.dx().max(chart.dy());
    let inside: Vec<usize> = chart.active_nodes().filter(|&n| chart.z(n).norm() <= rim).collect();
    let mut ext = 0.0;
    let mut area = 0.0;
    let mut ratio = 0.0f64;
    for &n in &inside {
        let w = chart.weight(n);
        let qa = q.values().get(n).norm();
        let r = rho.get(n).xx;
        ext += qa * w;
        area += r * w;
        ratio = ratio.max(qa / r);
    }
    let margin = 1.5 * area - ext;
    Ok(NehariCertificate { ext, area, pointwise_ratio: ratio, margin, pass: margin >= 0.0 && ratio <= 1.5 + 1e-9 })
}
