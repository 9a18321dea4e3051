use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;

use crate::calculus::{ComplexField, GridChart};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Value and first three complex derivatives (f, f′, f″, f‴) at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet3(pub [Complex64; 4]);

impl Jet3 {
    pub fn constant(c: Complex64) -> Self {
        Jet3([c, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])
    }

    /// The identity map's jet at z.
    pub fn variable(z: Complex64) -> Self {
        Jet3([z, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])
    }

    pub fn value(&self) -> Complex64 {
        self.0[0]
    }

    pub fn d1(&self) -> Complex64 {
        self.0[1]
    }

    /// Applies an outer function given its value and derivatives at self.value().
    pub fn compose(&self, outer: [Complex64; 4]) -> Jet3 {
        let [_, g1, g2, g3] = self.0;
        let [f0, f1, f2, f3] = outer;
        Jet3([
            f0,
            f1 * g1,
            f2 * g1 * g1 + f1 * g2,
            f3 * g1 * g1 * g1 + f2 * g1 * g2 * 3.0 + f1 * g3,
        ])
    }

    /// (outer ∘ self) for another jet taken at self.value().
    pub fn then(&self, outer: &Jet3) -> Jet3 {
        self.compose(outer.0)
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.0[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Jet3 {
        let g = self.0[0];
        let r = g.inv();
        self.compose([g.ln(), r, -r * r, r * r * r * 2.0])
    }

    pub fn recip(&self) -> Jet3 {
        let r = self.0[0].inv();
        self.compose([r, -r * r, r * r * r * 2.0, -r * r * r * r * 6.0])
    }

    /// S(f) = f‴/f′ − (3/2)(f″/f′)².
    pub fn schwarzian(&self) -> Complex64 {
        let a = self.0[2] / self.0[1];
        self.0[3] / self.0[1] - a * a * 1.5
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        Jet3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        Jet3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let [f0, f1, f2, f3] = self.0;
        let [g0, g1, g2, g3] = o.0;
        Jet3([
            f0 * g0,
            f1 * g0 + f0 * g1,
            f2 * g0 + f1 * g1 * 2.0 + f0 * g2,
            f3 * g0 + f2 * g1 * 3.0 + f1 * g2 * 3.0 + f0 * g3,
        ])
    }
}

impl Mul<Complex64> for Jet3 {
    type Output = Jet3;
    fn mul(self, s: Complex64) -> Jet3 {
        Jet3([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet3 {
    type Output = Jet3;
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}

/// Map values sampled on a chart; derivatives come from fourth-order
/// central differences along x (or y where x stencils run out), so S(f)
/// carries roughly O(h⁴) error away from the chart edge.
#[derive(Clone, Debug)]
pub struct SampledMap {
    values: ComplexField,
}

impl SampledMap {
    pub fn new(values: ComplexField) -> Self {
        SampledMap { values }
    }

    pub fn values(&self) -> &ComplexField {
        &self.values
    }

    fn jet_at(&self, node: usize) -> Result<Jet3> {
        let chart = self.values.chart();
        let v = self.values.values();
        for axis in 0..2 {
            let mut s = [Complex64::new(0.0, 0.0); 7];
            let mut ok = true;
            for (slot, k) in s.iter_mut().zip(-3i64..=3) {
                match if k == 0 { Some((node, [0, 0])) } else { chart.step(node, axis, k) } {
                    Some((m, [0, 0])) => *slot = v[m],
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let h = chart.spacing(axis);
            let d1 = (-s[5] + s[4] * 8.0 - s[2] * 8.0 + s[1]) / (12.0 * h);
            let d2 = (-s[5] + s[4] * 16.0 - s[3] * 30.0 + s[2] * 16.0 - s[1]) / (12.0 * h * h);
            let d3 = (-s[6] + s[5] * 8.0 - s[4] * 13.0 + s[2] * 13.0 - s[1] * 8.0 + s[0]) / (8.0 * h * h * h);
            // ∂y = i d/dz for holomorphic maps.
            let (d1, d2, d3) = if axis == 0 { (d1, d2, d3) } else { (-I * d1, -d2, I * d3) };
            return Ok(Jet3([s[3], d1, d2, d3]));
        }
        Err(Error::MaskTooSparse { node })
    }
}

/// Holomorphic maps with closed-form 3-jets, plus sampled maps.
#[derive(Clone, Debug)]
pub enum HolomorphicMap {
    /// (az + b)/(cz + d)
    Mobius { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    Exp,
    Log,
    Square,
    /// z/(1 − z)²
    Koebe,
    /// Riemann map of the strip 0 < Im z < π onto the unit disk:
    /// (e^z − i)/(e^z + i).
    StripUniformizer,
    /// Polynomial quotient; coefficients from the constant term upwards.
    Rational { num: Vec<Complex64>, den: Vec<Complex64> },
    /// outer ∘ inner
    Compose { outer: Box<HolomorphicMap>, inner: Box<HolomorphicMap> },
    Sampled(SampledMap),
}

impl HolomorphicMap {
    pub fn mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        HolomorphicMap::Mobius { a, b, c, d }
    }

    pub fn compose(outer: HolomorphicMap, inner: HolomorphicMap) -> Self {
        HolomorphicMap::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    /// Closed-form jet at z; sampled maps have no pointwise evaluator.
    pub fn jet(&self, z: Complex64) -> Result<Jet3> {
        let x = Jet3::variable(z);
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            HolomorphicMap::Mobius { a, b, c, d } => {
                let det = a * d - b * c;
                let w = c * z + d;
                let r = w.inv();
                Jet3([
                    (a * z + b) * r,
                    det * r * r,
                    -det * c * r * r * r * 2.0,
                    det * c * c * r * r * r * r * 6.0,
                ])
            }
            HolomorphicMap::Exp => x.exp(),
            HolomorphicMap::Log => x.ln(),
            HolomorphicMap::Square => x * x,
            HolomorphicMap::Koebe => {
                let w = Jet3::constant(one) - x;
                x / (w * w)
            }
            HolomorphicMap::StripUniformizer => {
                let e = x.exp();
                (e - Jet3::constant(I)) / (e + Jet3::constant(I))
            }
            HolomorphicMap::Rational { num, den } => {
                if den.is_empty() {
                    return Err(Error::InvalidInput("rational map needs a denominator"));
                }
                horner(num, x) / horner(den, x)
            }
            HolomorphicMap::Compose { outer, inner } => {
                let j = inner.jet(z)?;
                j.then(&outer.jet(j.value())?)
            }
            HolomorphicMap::Sampled(_) => {
                return Err(Error::InvalidInput("sampled maps are only evaluated on their own chart"))
            }
        })
    }

    /// Jets at every active node of `chart` (zero jets at excluded nodes).
    pub fn jets(&self, chart: &Arc<GridChart>) -> Result<Vec<Jet3>> {
        match self {
            HolomorphicMap::Sampled(s) => {
                s.values.check_chart(chart)?;
                (0..chart.len())
                    .map(|n| if chart.is_active(n) { s.jet_at(n) } else { Ok(Jet3::default()) })
                    .collect()
            }
            _ => (0..chart.len())
                .map(|n| if chart.is_active(n) { self.jet(chart.z(n)) } else { Ok(Jet3::default()) })
                .collect(),
        }
    }
}

fn horner(coeffs: &[Complex64], x: Jet3) -> Jet3 {
    coeffs
        .iter()
        .rev()
        .fold(Jet3::constant(Complex64::new(0.0, 0.0)), |acc, &c| acc * x + Jet3::constant(c))
}
