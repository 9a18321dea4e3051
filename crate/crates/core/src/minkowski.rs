//! Minkowski space R^{3,1}, the hyperboloid model of H³ and the future
//! light cone, which parametrizes horospheres.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::calculus::{fd_gradient, ConformalMetric, GridChart, ScalarField};
use crate::{Error, Result};

/// Horospheres are the sets {x ∈ H³ : ⟨x, σ⟩ = −c₀} for σ on the light
/// cone. This value makes the Epstein surface of h have I* = h.
pub const INCIDENCE: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for the hyperboloid constraint ⟨x,x⟩ = −1.
pub const HYPERBOLOID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MinkVec(pub [f64; 4]);

impl MinkVec {
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        MinkVec([x0, x1, x2, x3])
    }

    pub fn euclidean_norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    /// Squared Minkowski norm ⟨x,x⟩.
    pub fn norm2(&self) -> f64 {
        mink_inner(self, self)
    }
}

impl Add for MinkVec {
    type Output = MinkVec;
    fn add(self, o: MinkVec) -> MinkVec {
        MinkVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for MinkVec {
    type Output = MinkVec;
    fn sub(self, o: MinkVec) -> MinkVec {
        MinkVec([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Mul<f64> for MinkVec {
    type Output = MinkVec;
    fn mul(self, s: f64) -> MinkVec {
        MinkVec(self.0.map(|v| v * s))
    }
}

impl Neg for MinkVec {
    type Output = MinkVec;
    fn neg(self) -> MinkVec {
        self * -1.0
    }
}

/// ⟨x,y⟩ = −x₀y₀ + x₁y₁ + x₂y₂ + x₃y₃.
pub fn mink_inner(x: &MinkVec, y: &MinkVec) -> f64 {
    -x.0[0] * y.0[0] + x.0[1] * y.0[1] + x.0[2] * y.0[2] + x.0[3] * y.0[3]
}

/// A point of H³ ⊂ R^{3,1}: ⟨x,x⟩ = −1, x₀ > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperboloidPoint(MinkVec);

impl HyperboloidPoint {
    pub fn new(x: MinkVec) -> Result<Self> {
        let r = (x.norm2() + 1.0).abs();
        if r > HYPERBOLOID_TOL * (1.0 + x.0[0] * x.0[0]) || x.0[0] <= 0.0 {
            return Err(Error::InvalidInput("vector is not on the upper hyperboloid sheet"));
        }
        Ok(HyperboloidPoint(x))
    }

    pub const BASEPOINT: HyperboloidPoint = HyperboloidPoint(MinkVec::new(1.0, 0.0, 0.0, 0.0));

    pub fn vec(&self) -> MinkVec {
        self.0
    }

    /// Hyperbolic distance, from cosh d = −⟨x,y⟩.
    pub fn distance(&self, other: &HyperboloidPoint) -> f64 {
        libm::acosh((-mink_inner(&self.0, &other.0)).max(1.0))
    }
}

/// ℓ(z) = ½(1+|z|², 2Re z, 2Im z, 1−|z|²); its pullback metric is |dz|².
pub fn standard_null_section(z: Complex64) -> MinkVec {
    let r2 = z.norm_sqr();
    MinkVec::new(0.5 * (1.0 + r2), z.re, z.im, 0.5 * (1.0 - r2))
}

/// (∂ₓℓ, ∂ᵧℓ) at z.
pub fn standard_null_section_frame(z: Complex64) -> [MinkVec; 2] {
    [MinkVec::new(z.re, 1.0, 0.0, -z.re), MinkVec::new(z.im, 0.0, 1.0, -z.im)]
}

/// Boundary point at infinity of a future null vector, in the chart in
/// which ℓ(z) sits over z.
pub fn boundary_point(v: &MinkVec) -> Complex64 {
    let s = v.0[0] + v.0[3];
    Complex64::new(v.0[1] / s, v.0[2] / s)
}

/// (x₁,x₂,x₃)/(1+x₀).
pub fn to_poincare_ball(x: &HyperboloidPoint) -> [f64; 3] {
    let v = x.0 .0;
    let s = 1.0 / (1.0 + v[0]);
    [v[1] * s, v[2] * s, v[3] * s]
}

/// Inverse of [`to_poincare_ball`] for |p| < 1.
pub fn from_poincare_ball(p: [f64; 3]) -> Result<HyperboloidPoint> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if r2 >= 1.0 {
        return Err(Error::InvalidInput("point is not inside the unit ball"));
    }
    let s = 1.0 / (1.0 - r2);
    HyperboloidPoint::new(MinkVec::new((1.0 + r2) * s, 2.0 * p[0] * s, 2.0 * p[1] * s, 2.0 * p[2] * s))
}

/// Which intersection of the envelope line with the hyperboloid to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// The root closest along the line (the regular envelope point).
    Near,
    /// The other root; absent when the frame is exactly null-consistent.
    Far,
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves ⟨x,σ⟩ = −c₀, ⟨x,∂₁σ⟩ = ⟨x,∂₂σ⟩ = 0, ⟨x,x⟩ = −1 on the upper sheet.
pub fn horosphere_solve(sigma: &MinkVec, d1: &MinkVec, d2: &MinkVec, branch: Branch) -> Result<HyperboloidPoint> {
    // Rows η·v turn Minkowski products into Euclidean ones.
    let lower = |v: &MinkVec| [-v.0[0], v.0[1], v.0[2], v.0[3]];
    let rows = [lower(sigma), lower(d1), lower(d2)];
    let scale: [f64; 3] = [sigma, d1, d2].map(|v| v.euclidean_norm());
    if scale.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(Error::DegenerateFrame);
    }
    let r: [[f64; 4]; 3] = core::array::from_fn(|k| rows[k].map(|v| v / scale[k]));
    let b = [-INCIDENCE / scale[0], 0.0, 0.0];
    let gram: [[f64; 3]; 3] =
        core::array::from_fn(|i| core::array::from_fn(|j| (0..4).map(|c| r[i][c] * r[j][c]).sum()));
    let det = det3(gram);
    if det.abs() < 1e-24 {
        return Err(Error::DegenerateFrame);
    }
    let mut y = [0.0; 3];
    for k in 0..3 {
        let mut m = gram;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        y[k] = det3(m) / det;
    }
    let xp = MinkVec(core::array::from_fn(|c| (0..3).map(|k| y[k] * r[k][c]).sum()));
    // Euclidean normal to the three rows: Minkowski-orthogonal to σ, ∂σ.
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        det3(core::array::from_fn(|i| core::array::from_fn(|j| r[i][cols[j]])))
    };
    let mut n = MinkVec([minor(0), -minor(1), minor(2), -minor(3)]);
    let nn = n.euclidean_norm();
    if nn == 0.0 {
        return Err(Error::DegenerateFrame);
    }
    n = n * (1.0 / nn);
    let a = mink_inner(&n, &n);
    let bq = mink_inner(&xp, &n);
    let c = mink_inner(&xp, &xp) + 1.0;
    let disc = bq * bq - a * c;
    if disc < 0.0 {
        return Err(Error::NoRealRoot);
    }
    let q = -(bq + libm::copysign(libm::sqrt(disc), bq));
    let t = match branch {
        Branch::Near => {
            if q == 0.0 {
                return Err(Error::NoRealRoot);
            }
            c / q
        }
        Branch::Far => {
            if a.abs() <= 1e-12 * q.abs() {
                return Err(Error::NoRealRoot);
            }
            q / a
        }
    };
    let x = xp + n * t;
    if x.0[0] <= 0.0 {
        return Err(Error::NoRealRoot);
    }
    // Restore ⟨x,x⟩ = −1 exactly up to rounding of the root.
    HyperboloidPoint::new(x).or(Err(Error::NoRealRoot))
}

/// Linear isometry of R^{3,1}, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorentz(pub [[f64; 4]; 4]);

impl Lorentz {
    pub const IDENTITY: Lorentz =
        Lorentz([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]);

    pub fn apply(&self, v: &MinkVec) -> MinkVec {
        MinkVec(core::array::from_fn(|i| (0..4).map(|j| self.0[i][j] * v.0[j]).sum()))
    }

    pub fn compose(&self, other: &Lorentz) -> Lorentz {
        Lorentz(core::array::from_fn(|i| {
            core::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum())
        }))
    }

    /// Boost of rapidity `r` along spatial axis 1, 2 or 3.
    pub fn boost(axis: usize, r: f64) -> Lorentz {
        let mut m = Lorentz::IDENTITY.0;
        let (c, s) = (libm::cosh(r), libm::sinh(r));
        m[0][0] = c;
        m[axis][axis] = c;
        m[0][axis] = s;
        m[axis][0] = s;
        Lorentz(m)
    }

    /// Rotation by angle `a` in the spatial (i, j) plane.
    pub fn rotation(i: usize, j: usize, a: f64) -> Lorentz {
        let mut m = Lorentz::IDENTITY.0;
        let (c, s) = (libm::cos(a), libm::sin(a));
        m[i][i] = c;
        m[j][j] = c;
        m[i][j] = -s;
        m[j][i] = s;
        Lorentz(m)
    }

    /// The isometry inducing z ↦ z + a on the boundary chart:
    /// ℓ(z) ↦ ℓ(z + a).
    pub fn parabolic(a: Complex64) -> Lorentz {
        // In (s, d, w) = (x₀+x₃, x₀−x₃, x₁+ix₂):
        // (s, d, w) ↦ (s, d + 2Re(ā w) + |a|² s, w + a s).
        let (ar, ai) = (a.re, a.im);
        let a2 = a.norm_sqr();
        let mut m = [[0.0; 4]; 4];
        // x₀ = (s + d)/2, x₃ = (s − d)/2 with s, d linear in x.
        // s' = s, d' = d + 2(ar x₁ + ai x₂) + a2 s, x₁' = x₁ + ar s, x₂' = x₂ + ai s.
        let s = [1.0, 0.0, 0.0, 1.0];
        let d = [1.0, 0.0, 0.0, -1.0];
        let mut dn = [0.0; 4];
        for c in 0..4 {
            dn[c] = d[c] + a2 * s[c];
        }
        dn[1] += 2.0 * ar;
        dn[2] += 2.0 * ai;
        for c in 0..4 {
            m[0][c] = 0.5 * (s[c] + dn[c]);
            m[3][c] = 0.5 * (s[c] - dn[c]);
            m[1][c] = ar * s[c];
            m[2][c] = ai * s[c];
        }
        m[1][1] += 1.0;
        m[2][2] += 1.0;
        Lorentz(m)
    }
}

/// Deck transform for a field on `chart` that is equivariant under the
/// chart's periodic translations (z ↦ z + Lx, z ↦ z + i Ly).
pub fn deck_lift(chart: &GridChart) -> impl Fn(MinkVec, [i8; 2]) -> MinkVec {
    let lx = chart.period(0).unwrap_or(0.0);
    let ly = chart.period(1).unwrap_or(0.0);
    move |v, w| {
        let a = Complex64::new(w[0] as f64 * lx, w[1] as f64 * ly);
        Lorentz::parabolic(a).apply(&v)
    }
}

/// Null section σ = e^{u}ℓ over a chart, with u the flat-base log-factor of
/// a conformal metric.
#[derive(Clone, Debug)]
pub struct LightConeSection {
    u: ScalarField,
    values: Vec<MinkVec>,
}

impl LightConeSection {
    pub fn from_metric(h: &ConformalMetric) -> Self {
        let u = h.flat_factor();
        let chart = u.chart().clone();
        let values = (0..chart.len())
            .map(|n| {
                if chart.is_active(n) {
                    standard_null_section(chart.z(n)) * libm::exp(u.get(n))
                } else {
                    MinkVec::default()
                }
            })
            .collect();
        LightConeSection { u, values }
    }

    /// λσ.
    pub fn scaled(&self, lambda: f64) -> Self {
        let c = libm::log(lambda);
        LightConeSection { u: self.u.map(|v| v + c), values: self.values.iter().map(|v| *v * lambda).collect() }
    }

    pub fn chart(&self) -> &Arc<GridChart> {
        self.u.chart()
    }

    pub fn log_factor(&self) -> &ScalarField {
        &self.u
    }

    pub fn values(&self) -> &[MinkVec] {
        &self.values
    }

    /// (∂ₓσ, ∂ᵧσ) = e^{u}(du ℓ + dℓ) with finite-difference du; keeps
    /// ⟨σ, dσ⟩ = 0 exactly.
    pub fn frame(&self) -> Result<Vec<[MinkVec; 2]>> {
        let du = fd_gradient(&self.u)?;
        let chart = self.chart();
        Ok((0..chart.len())
            .map(|n| {
                if !chart.is_active(n) {
                    return [MinkVec::default(); 2];
                }
                let z = chart.z(n);
                let l = standard_null_section(z);
                let dl = standard_null_section_frame(z);
                let e = libm::exp(self.u.get(n));
                let g = du.get(n);
                [(l * g[0] + dl[0]) * e, (l * g[1] + dl[1]) * e]
            })
            .collect())
    }
}
