//! Charts, metrics and maps shared by the suites and the commands.

use std::sync::Arc;

use epstein_core::calculus::{BaseMetric, ConformalMetric, Field, GridChart, ScalarField};
use epstein_core::schwarzian::HolomorphicMap;
use epstein_core::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// n × n nodes on [x0, x0 + 2r] × [y0, y0 + 2r].
pub fn square_at(n: usize, x0: f64, y0: f64, r: f64) -> Result<Arc<GridChart>> {
    Ok(Arc::new(GridChart::rect(n, n, [x0, x0 + 2.0 * r], [y0, y0 + 2.0 * r])?))
}

/// n × n nodes on [−r, r]².
pub fn square(n: usize, r: f64) -> Result<Arc<GridChart>> {
    square_at(n, -r, -r, r)
}

/// The nodes of [−r, r]² (n per axis) with |z| ≤ r.
pub fn disk(n: usize, r: f64) -> Result<Arc<GridChart>> {
    Ok(Arc::new(GridChart::rect(n, n, [-r, r], [-r, r])?.restrict(|z| z.norm() <= r * (1.0 + 1e-12))?))
}

pub fn scalar(chart: &Arc<GridChart>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
    Field::from_fn(chart, |z: Complex64| f(z.re, z.im))
}

/// |dz|²/(2y²) on a chart in the upper half-plane: the Fuchsian metric, of
/// curvature −2.
pub fn fuchsian_half_plane(chart: &Arc<GridChart>) -> ConformalMetric {
    ConformalMetric::flat(scalar(chart, |_, y| -(2f64.sqrt() * y).ln()))
}

/// Half the Poincaré metric of the unit disk.
pub fn fuchsian_disk(chart: &Arc<GridChart>) -> Result<ConformalMetric> {
    ConformalMetric::new(BaseMetric::DiskHyperbolic, Field::constant(chart, -0.5 * 2f64.ln()))
}

/// e^{2u}|dz|² with u = 0.5 plus a few seeded low modes of amplitude ≤ 0.08.
pub fn random_metric(chart: &Arc<GridChart>, seed: u64) -> ConformalMetric {
    let mut r = rng(seed);
    let modes: Vec<[f64; 4]> = (0..4)
        .map(|_| [r.gen_range(-0.08..0.08), r.gen_range(1.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(0.0..6.3)])
        .collect();
    ConformalMetric::flat(scalar(chart, |x, y| {
        0.5 + modes.iter().map(|[a, kx, ky, p]| a * (kx * x + ky * y + p).sin()).sum::<f64>()
    }))
}

pub fn random_mobius(rng: &mut impl Rng) -> HolomorphicMap {
    loop {
        let mut z = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (a, b, c, d) = (z(), z(), z(), z());
        // pole at −d/c stays well away from |Re z|, |Im z| ≤ 0.5
        if (a * d - b * c).norm() > 0.1 && d.norm() > 2.0 * c.norm() {
            return HolomorphicMap::mobius(a, b, c, d);
        }
    }
}

/// Maps accepted by `--map`.
pub fn named_map(name: &str) -> Option<HolomorphicMap> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Some(match name {
        "exp" => HolomorphicMap::Exp,
        "log" => HolomorphicMap::Log,
        "square" => HolomorphicMap::Square,
        "koebe" => HolomorphicMap::Koebe,
        "strip" => HolomorphicMap::StripUniformizer,
        "cayley" => HolomorphicMap::mobius(c(1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0)),
        "exp-exp" => HolomorphicMap::compose(HolomorphicMap::Exp, HolomorphicMap::Exp),
        _ => return None,
    })
}

pub const MAP_NAMES: &[&str] = &["exp", "log", "square", "koebe", "strip", "cayley", "exp-exp"];
