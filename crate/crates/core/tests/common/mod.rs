#![allow(dead_code)]

use std::sync::Arc;

use epstein_core::calculus::{BaseMetric, ConformalMetric, Field, GridChart, ScalarField};
use epstein_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rect(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Arc<GridChart> {
    Arc::new(GridChart::rect(nx, ny, x, y).unwrap())
}

/// Rectangle with spacing close to `dx` along both axes.
pub fn rect_dx(dx: f64, x: [f64; 2], y: [f64; 2]) -> Arc<GridChart> {
    let count = |a: [f64; 2]| ((a[1] - a[0]) / dx).round() as usize + 1;
    rect(count(x), count(y), x, y)
}

/// Nodes of |z| ≤ r on a square grid of spacing ≈ `dx`.
pub fn disk(dx: f64, r: f64) -> Arc<GridChart> {
    let n = (2.0 * r / dx).round() as usize + 1;
    Arc::new(GridChart::rect(n, n, [-r, r], [-r, r]).unwrap().restrict(|z| z.norm() <= r + 1e-12).unwrap())
}

pub fn torus(n: usize, l: f64) -> Arc<GridChart> {
    Arc::new(GridChart::torus(n, n, 0.0, 0.0, l, l).unwrap())
}

pub fn flat_zero(chart: &Arc<GridChart>) -> ConformalMetric {
    ConformalMetric::flat(Field::constant(chart, 0.0))
}

/// |dz|²/(2y²): curvature −2 on the upper half-plane.
pub fn fuchsian_half_plane(chart: &Arc<GridChart>) -> ConformalMetric {
    ConformalMetric::flat(Field::from_fn(chart, |z| -(2f64.sqrt() * z.im).ln()))
}

/// Half the Poincaré metric of the unit disk.
pub fn fuchsian_disk(chart: &Arc<GridChart>) -> ConformalMetric {
    ConformalMetric::new(BaseMetric::DiskHyperbolic, Field::constant(chart, -0.5 * 2f64.ln())).unwrap()
}

pub fn field(chart: &Arc<GridChart>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
    Field::from_fn(chart, |z: Complex64| f(z.re, z.im))
}

/// A smooth metric away from focal singularities of its Epstein surface.
pub fn smooth_metric(chart: &Arc<GridChart>) -> ConformalMetric {
    ConformalMetric::flat(field(chart, |x, y| 0.5 + 0.3 * (2.0 * x).sin() + 0.2 * (3.0 * y).cos() * x))
}

pub fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
