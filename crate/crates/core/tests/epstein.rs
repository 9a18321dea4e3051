mod common;

use std::sync::Arc;

use common::*;
use epstein_core::calculus::{conformal_factor, gauss_curvature, ConformalMetric, Field, GridChart, OperatorField};
use epstein_core::epstein::{
    admissibility_residuals, b_from_bstar, data_at_infinity, epstein_surface, equidistant_metric,
    fundamental_forms, gauss_map_defect, htame_check, hyperbolic_gauss_map, infinity_data_of_metric,
    shape_at_infinity, InfinityData, FORM_MARGIN,
};
use epstein_core::linalg::{Mat2, Sym2};
use epstein_core::minkowski::{mink_inner, INCIDENCE};
use epstein_core::{Complex64, Error};
use proptest::prelude::*;

fn sup_op_diff(a: &OperatorField, m: Mat2, margin: u32) -> f64 {
    a.chart().nodes_with_margin(margin).map(|n| (a.get(n) - m).max_abs()).fold(0.0, f64::max)
}

fn small_chart() -> Arc<GridChart> {
    rect(5, 5, [0.0, 1.0], [0.0, 1.0])
}

#[test]
fn envelope_matches_closed_form_point() {
    // oracle in upper half-space coordinates t = 1/(x₀+x₃), w = (x₁+ix₂)t:
    // t = 2c₀e^{−u}/(1 + c₀²e^{−2u}|∇u|²), w = z + t c₀ e^{−u}(uₓ + iu_y)
    let u = |x: f64, y: f64| 0.5 + 0.3 * (2.0 * x).sin() + 0.2 * (3.0 * y).cos() * x;
    let grad = |x: f64, y: f64| (0.6 * (2.0 * x).cos() + 0.2 * (3.0 * y).cos(), -0.6 * (3.0 * y).sin() * x);
    let err = |dx: f64| {
        let chart = rect_dx(dx, [-0.4, 0.4], [-0.4, 0.4]);
        let s = epstein_surface(&ConformalMetric::flat(field(&chart, u))).unwrap();
        let c0 = INCIDENCE;
        chart
            .nodes_with_margin(1)
            .map(|n| {
                let z = chart.z(n);
                let (ux, uy) = grad(z.re, z.im);
                let e = (-u(z.re, z.im)).exp();
                let t = 2.0 * c0 * e / (1.0 + c0 * c0 * e * e * (ux * ux + uy * uy));
                let w = z + Complex64::new(ux, uy) * (t * c0 * e);
                let x = s.points()[n].0;
                let tt = 1.0 / (x[0] + x[3]);
                let ww = Complex64::new(x[1], x[2]) * tt;
                (tt - t).abs().max((ww - w).norm())
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (err(0.02), err(0.01));
    assert!(b < 10.0 * 1e-4, "{b}");
    assert!((1.7..2.3).contains(&order(a, b)), "{a} {b}");
}

#[test]
fn constant_metric_calibration() {
    let chart = rect(21, 21, [-0.5, 0.5], [-0.5, 0.5]);
    for u0 in [-0.7, 0.0, 0.4] {
        let s = epstein_surface(&ConformalMetric::flat(Field::constant(&chart, u0))).unwrap();
        let d = fundamental_forms(&s).unwrap();
        assert!(sup_op_diff(&d.b, Mat2::IDENTITY, 0) < 1e-6);
        let inf = data_at_infinity(&d).unwrap();
        let expect = Field::constant(&chart, Sym2::scalar((2.0 * u0).exp()));
        assert!(inf.istar.sup_diff(&expect, 0).unwrap() < 1e-6);
        assert!(inf.iistar.sup_norm(0) < 1e-6);
    }
}

#[test]
fn fuchsian_metric_gives_a_totally_geodesic_plane() {
    // the discretization error is about 2dx², so 1e-5 needs a fine grid
    let chart = disk(1.25e-3, 0.25);
    let d = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart)).unwrap()).unwrap();
    assert!(sup_op_diff(&d.b, Mat2::ZERO, FORM_MARGIN) < 1e-5);
    assert!(d.iii.sup_norm(FORM_MARGIN) < 1e-5);
    let inf = data_at_infinity(&d).unwrap();
    let scale = inf.istar.sup_norm(FORM_MARGIN);
    assert!(inf.iistar.sup_diff(&inf.istar, FORM_MARGIN).unwrap() < 1e-5 * scale);
    assert!(sup_op_diff(&inf.bstar, Mat2::IDENTITY, FORM_MARGIN) < 1e-5);
}

#[test]
fn scaling_the_metric_gives_equidistant_surfaces() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let h = smooth_metric(&chart);
    let s0 = epstein_surface(&h).unwrap();
    for r in [0.3f64, 1.0] {
        let s1 = epstein_surface(&h.scaled(r)).unwrap();
        for n in chart.active_nodes() {
            let d = s0.point(n).distance(&s1.point(n));
            assert!((d - r).abs() < 1e-6);
        }
    }
}

#[test]
fn equidistant_surfaces_of_the_plane_are_umbilic() {
    let chart = disk(2.5e-3, 0.3);
    for r in [0.3f64, 1.0] {
        let d = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart).scaled(r)).unwrap()).unwrap();
        let t = r.tanh();
        for n in chart.nodes_with_margin(FORM_MARGIN) {
            let (lo, hi) = d.b.get(n).real_eigenvalues();
            assert!((hi - lo).abs() < 1e-4);
            assert!((lo.abs() - t).abs() < 1e-4, "{lo} vs tanh {r}");
        }
    }
}

#[test]
fn gauss_map_is_the_chart_identity() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let s = epstein_surface(&smooth_metric(&chart)).unwrap();
    assert!(gauss_map_defect(&s, 0) < 1e-6);
    let u = epstein_surface(&ConformalMetric::flat(Field::constant(&chart, 0.2))).unwrap();
    assert!(gauss_map_defect(&u, 0) < 1e-6);
    let flipped = hyperbolic_gauss_map(&s.flipped());
    assert!(chart.active_nodes().all(|n| (flipped.get(n) - chart.z(n)).norm() > 1e-3));
}

#[test]
fn flipping_negates_the_shape_operator() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let s = epstein_surface(&smooth_metric(&chart)).unwrap();
    let a = fundamental_forms(&s).unwrap();
    let b = fundamental_forms(&s.flipped()).unwrap();
    for n in chart.active_nodes() {
        assert!((a.b.get(n) + b.b.get(n)).max_abs() < 1e-12 * (1.0 + a.b.get(n).max_abs()));
    }
}

#[test]
fn umbilic_data_at_infinity() {
    let chart = small_chart();
    let i = Field::constant(&chart, Sym2::scalar(2.0));
    let flat_umbilic = InfinityData::new(i.clone(), Field::constant(&chart, Sym2::ZERO)).unwrap();
    assert_eq!(flat_umbilic.bstar.get(0), Mat2::ZERO);
    assert!(InfinityData::new(Field::constant(&chart, Sym2::new(1.0, 2.0, 1.0)), i).is_err());
}

#[test]
fn dictionary_examples() {
    let chart = small_chart();
    let zero = Field::constant(&chart, Mat2::ZERO);
    assert_eq!(shape_at_infinity(&zero).unwrap().get(0), Mat2::IDENTITY);
    assert_eq!(b_from_bstar(&Field::constant(&chart, Mat2::IDENTITY)).unwrap().get(0), Mat2::ZERO);
    for r in [0.1f64, 0.5, 2.0] {
        let bs = shape_at_infinity(&Field::constant(&chart, Mat2::scalar(r.tanh()))).unwrap();
        assert!((bs.get(0) - Mat2::scalar((-2.0 * r).exp())).max_abs() < 1e-12);
        let b = b_from_bstar(&Field::constant(&chart, Mat2::scalar((-2.0 * r).exp()))).unwrap();
        assert!((b.get(0) - Mat2::scalar(r.tanh())).max_abs() < 1e-12);
    }
    let minus = Field::constant(&chart, Mat2::scalar(-1.0));
    assert!(matches!(shape_at_infinity(&minus), Err(Error::EigenvalueMinusOne { .. })));
    assert!(matches!(b_from_bstar(&minus), Err(Error::SingularDictionary { .. })));
}

#[test]
fn positive_bstar_gives_tame_spectrum() {
    let chart = small_chart();
    let mut r = rng(9);
    use rand::Rng;
    for _ in 0..100 {
        let a: f64 = r.gen_range(0.01..5.0);
        let c: f64 = r.gen_range(0.01..5.0);
        let b: f64 = r.gen_range(-1.0..1.0) * (a * c).sqrt();
        let bs = Field::constant(&chart, Mat2::new(a, b, b, c));
        let (lo, hi) = b_from_bstar(&bs).unwrap().get(0).real_eigenvalues();
        assert!(lo > -1.0 && hi < 1.0);
    }
}

#[test]
fn tameness_examples() {
    let dx = 1e-2;
    let tol = 10.0 * dx * dx;
    let chart = disk(dx, 0.5);
    let plane = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart)).unwrap()).unwrap();
    let t = htame_check(&plane);
    assert!(t.all_tame && (t.margin - 1.0).abs() < tol);
    let r = 0.5f64;
    let eq = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart).scaled(r)).unwrap()).unwrap();
    let t = htame_check(&eq);
    assert!(t.all_tame && (t.margin - (1.0 - r.tanh())).abs() < tol);
    let horo = fundamental_forms(&epstein_surface(&flat_zero(&chart)).unwrap()).unwrap();
    assert!(!htame_check(&horo).all_tame);
}

#[test]
fn admissibility_of_model_data() {
    let chart = rect_dx(1e-2, [-0.5, 0.5], [1.0, 2.0]);
    let (_, gauss) = admissibility_residuals(&infinity_data_of_metric(&fuchsian_half_plane(&chart)).unwrap()).unwrap();
    assert!(gauss < 1e-3);
    let flat = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::ZERO)).unwrap();
    let (c, g) = admissibility_residuals(&flat).unwrap();
    assert!(c < 1e-12 && g < 1e-12);
}

#[test]
fn admissibility_of_epstein_data_converges_at_second_order() {
    let run = |dx: f64| {
        let chart = rect_dx(dx, [-0.4, 0.4], [-0.4, 0.4]);
        let inf = data_at_infinity(&fundamental_forms(&epstein_surface(&smooth_metric(&chart)).unwrap()).unwrap())
            .unwrap();
        admissibility_residuals(&inf).unwrap()
    };
    let (a, b) = (run(0.02), run(0.01));
    assert!((1.6..2.4).contains(&order(a.0, b.0)), "codazzi {a:?} {b:?}");
    assert!((1.6..2.4).contains(&order(a.1, b.1)), "gauss {a:?} {b:?}");
}

#[test]
fn equidistant_leaves_of_model_data() {
    let chart = rect_dx(1e-2, [-0.5, 0.5], [1.0, 2.0]);
    let h = fuchsian_half_plane(&chart);
    let inf = InfinityData::new(h.tensor(), h.tensor()).unwrap();
    for r in [0.2f64, 0.9] {
        let leaf = equidistant_metric(&inf, r).unwrap();
        let expect = h.tensor().map(|t| t * (2.0 * r.cosh() * r.cosh()));
        assert!(leaf.sup_diff(&expect, 0).unwrap() < 1e-12);
        let k = gauss_curvature(&ConformalMetric::flat(conformal_factor(&leaf).unwrap())).unwrap();
        let target = -1.0 / (r.cosh() * r.cosh());
        assert!(chart.nodes_with_margin(1).all(|n| (k.get(n) - target).abs() < 1e-3));
    }
    let flat = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::ZERO)).unwrap();
    let leaf = equidistant_metric(&flat, 0.7).unwrap();
    assert!((leaf.get(0).xx - 0.5 * 1.4f64.exp()).abs() < 1e-12);
}

#[test]
fn equidistant_leaf_matches_scaled_epstein_surface() {
    let run = |dx: f64| {
        let chart = rect_dx(dx, [-0.4, 0.4], [-0.4, 0.4]);
        let h = smooth_metric(&chart);
        let inf = data_at_infinity(&fundamental_forms(&epstein_surface(&h).unwrap()).unwrap()).unwrap();
        let leaf = equidistant_metric(&inf, 0.4).unwrap();
        let direct = fundamental_forms(&epstein_surface(&h.scaled(0.4)).unwrap()).unwrap().i;
        leaf.sup_diff(&direct, FORM_MARGIN).unwrap()
    };
    let (a, b) = (run(0.02), run(0.01));
    assert!(b < 10.0 * 1e-4 * 10.0, "{b}");
    assert!((1.6..2.4).contains(&order(a, b)), "{a} {b}");
}

#[test]
fn second_form_at_infinity_is_scale_invariant() {
    let dx = 1e-2;
    let chart = rect_dx(dx, [-0.4, 0.4], [-0.4, 0.4]);
    let h = smooth_metric(&chart);
    let data = |h: &ConformalMetric| data_at_infinity(&fundamental_forms(&epstein_surface(h).unwrap()).unwrap()).unwrap();
    let a = data(&h);
    let b = data(&h.scaled(0.6));
    assert!(a.iistar.sup_diff(&b.iistar, FORM_MARGIN).unwrap() < 10.0 * dx * dx);
}

#[test]
fn frame_of_epstein_surface_is_orthonormal() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let s = epstein_surface(&smooth_metric(&chart)).unwrap();
    assert!(epstein_core::epstein::frame_residual(&s) < 1e-9);
    for n in chart.active_nodes() {
        let (x, nv) = (s.points()[n], s.normals()[n]);
        assert!(mink_inner(&x, &nv).abs() < 1e-9);
    }
}

fn random_operator(l1: f64, l2: f64, p: [f64; 4]) -> Mat2 {
    let pm = Mat2::new(p[0], p[1], p[2], p[3]);
    pm * Mat2::new(l1, 0.0, 0.0, l2) * pm.inverse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dictionary_is_an_involution(
        l1 in -0.95..0.95f64, l2 in -0.95..0.95f64,
        a in 0.5..2.0f64, b in -0.5..0.5f64, c in -0.5..0.5f64, d in 0.5..2.0f64,
    ) {
        let chart = small_chart();
        let m = random_operator(l1, l2, [a, b, c, d]);
        let f = Field::constant(&chart, m);
        let back = b_from_bstar(&shape_at_infinity(&f).unwrap()).unwrap();
        prop_assert!((back.get(0) - m).max_abs() < 1e-12);
    }

    #[test]
    fn tame_iff_bstar_positive(l1 in -3.0..3.0f64, l2 in -3.0..3.0f64) {
        prop_assume!((l1 + 1.0).abs() > 1e-3 && (l2 + 1.0).abs() > 1e-3);
        let chart = small_chart();
        let m = random_operator(l1, l2, [1.0, 0.3, -0.2, 1.1]);
        let bs = shape_at_infinity(&Field::constant(&chart, m)).unwrap().get(0);
        let (lo, hi) = bs.real_eigenvalues();
        let tame = l1.abs() < 1.0 && l2.abs() < 1.0;
        prop_assert_eq!(tame, lo > 0.0 && hi > 0.0);
    }
}
