mod common;

use std::sync::Arc;

use common::*;
use epstein_core::calculus::{ConformalMetric, Field, GridChart, ScalarField};
use epstein_core::epstein::{
    b_from_bstar, epstein_surface, fundamental_forms, infinity_data_of_metric, InfinityData, FORM_MARGIN,
};
use epstein_core::linalg::{Mat2, Sym2};
use epstein_core::weingarten::{
    cmc1_residual, det_trace_field, det_trace_from_bstar, ma_newton_solve, ma_residual, ma_residual_operator_form,
    verify_solution_geometrically, weingarten_residual_infinity, weingarten_residual_surface, MaProblem,
    NewtonConfig, WeingartenCoeffs, WeingartenTag, DIRICHLET_MARGIN,
};
use epstein_core::Error;
use proptest::prelude::*;

fn co(a: f64, b: f64, c: f64) -> WeingartenCoeffs {
    WeingartenCoeffs::new(a, b, c).unwrap()
}

fn sup_inner(f: &ScalarField, margin: u32) -> f64 {
    f.sup_norm(margin)
}

/// Residual at infinity for B* = λE, i.e. B = κE with κ = (1−λ)/(1+λ).
fn umbilic_infinity_residual(c: &WeingartenCoeffs, lambda: f64) -> f64 {
    let chart = rect(5, 5, [0.0, 1.0], [0.0, 1.0]);
    let inf = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::scalar(lambda)))
        .unwrap();
    weingarten_residual_infinity(&inf, c).unwrap().get(12)
}

#[test]
fn classification_examples() {
    let m = WeingartenCoeffs::MINIMAL.classify();
    assert!(m.elliptic && m.tag == WeingartenTag::Minimal && !m.degenerate_front);
    let c = co(0.0, 1.0, 1.0).classify();
    assert!(c.degenerate_front && c.tag == WeingartenTag::Cmc1);
    let k = co(1.0, 0.0, -0.5).classify();
    assert!(k.elliptic && k.tag == WeingartenTag::ConstantKe(0.5));
    assert!(!co(1.0, 0.0, 2.0).classify().elliptic);
    assert!(WeingartenCoeffs::new(0.0, 0.0, 0.0).is_err());
    assert!(WeingartenCoeffs::new(f64::NAN, 1.0, 0.0).is_err());
}

#[test]
fn surface_residual_on_planes_and_equidistant_surfaces() {
    let dx = 2.5e-3;
    let chart = disk(dx, 0.3);
    let plane = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart)).unwrap()).unwrap();
    let tol = 10.0 * dx * dx;
    assert!(sup_inner(&weingarten_residual_surface(&plane, &WeingartenCoeffs::MINIMAL), FORM_MARGIN) < tol);
    let r = 0.5f64;
    let t = r.tanh();
    let eq = fundamental_forms(&epstein_surface(&fuchsian_disk(&chart).scaled(r)).unwrap()).unwrap();
    let ke = co(1.0, 0.0, -t * t);
    assert!(sup_inner(&weingarten_residual_surface(&eq, &ke), FORM_MARGIN) < 1e-4);
    // an equidistant surface is not minimal
    let h = weingarten_residual_surface(&eq, &WeingartenCoeffs::MINIMAL);
    for n in chart.nodes_with_margin(FORM_MARGIN) {
        assert!((h.get(n).abs() - t).abs() < 1e-4);
    }
}

#[test]
fn infinity_residual_on_umbilic_data() {
    let minimal = WeingartenCoeffs::MINIMAL;
    // B* = E is the plane
    assert!(umbilic_infinity_residual(&minimal, 1.0).abs() < 1e-15);
    // minimal: det B* − 1
    assert!((umbilic_infinity_residual(&minimal, 2.0) - 3.0).abs() < 1e-14);
    let chart = rect(5, 5, [0.0, 1.0], [0.0, 1.0]);
    let bad = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::ZERO)).unwrap();
    assert!(matches!(weingarten_residual_infinity(&bad, &co(0.0, 1.0, 1.0)), Err(Error::DegenerateFrontCoefficients)));
}

#[test]
fn cmc1_examples() {
    let chart = rect(5, 5, [0.0, 1.0], [0.0, 1.0]);
    let data = |b: Sym2| InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, b)).unwrap();
    assert_eq!(cmc1_residual(&data(Sym2::scalar(-1.0))).get(0), 0.0);
    assert_eq!(cmc1_residual(&data(Sym2::IDENTITY)).get(0), 4.0);
    let s = 0.7;
    assert!(cmc1_residual(&data(Sym2::new(-1.0 - s, 0.0, -1.0 + s))).get(0).abs() < 1e-15);
}

fn fuchsian_problem(c: WeingartenCoeffs, u_const: f64) -> MaProblem {
    let chart = Arc::new(GridChart::rect(40, 40, [-0.2, 0.2], [1.0, 1.4]).unwrap());
    let h = fuchsian_half_plane(&chart);
    let base = InfinityData::new(h.tensor(), h.tensor()).unwrap();
    MaProblem::new_unchecked(base, c, Some(Field::constant(&chart, u_const))).unwrap()
}

#[test]
fn constant_solutions_of_the_discrete_equation() {
    // λE on a flat torus: e^{-4u}λ² = 1
    let chart = torus(16, 1.0);
    let lambda = 2.5f64;
    let base = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), Field::constant(&chart, Sym2::scalar(lambda)))
        .unwrap();
    let p = MaProblem::new_unchecked(base, WeingartenCoeffs::MINIMAL, None).unwrap();
    assert!(ma_residual(&Field::constant(&chart, 0.5 * lambda.ln()), &p).unwrap().sup_norm(0) < 1e-12);
    // K_e = k over a Fuchsian base with B* = E
    for k in [0.25f64, 0.5] {
        let mu = (1.0 + k.sqrt()) / (1.0 - k.sqrt());
        let p = fuchsian_problem(co(1.0, 0.0, -k), 0.5 * mu.ln());
        let u = Field::constant(p.chart(), 0.5 * mu.ln());
        // one-sided stencils on the fixed margin only see round-off
        assert!(ma_residual(&u, &p).unwrap().sup_norm(DIRICHLET_MARGIN) < 1e-12);
    }
}

#[test]
fn zero_u_reduces_to_the_residual_at_infinity() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let base = infinity_data_of_metric(&smooth_metric(&chart)).unwrap();
    let c = co(1.0, 0.3, -0.4);
    let p = MaProblem::new_unchecked(base.clone(), c, Some(Field::constant(&chart, 0.0))).unwrap();
    let r = ma_residual(&Field::constant(&chart, 0.0), &p).unwrap();
    let w = weingarten_residual_infinity(&base, &c).unwrap();
    assert!(r.sup_diff(&w, 0).unwrap() < 1e-12 * (1.0 + w.sup_norm(0)));
}

#[test]
fn operator_and_tensor_forms_agree() {
    let chart = rect_dx(0.02, [-0.4, 0.4], [-0.4, 0.4]);
    let base = infinity_data_of_metric(&smooth_metric(&chart)).unwrap();
    let u = field(&chart, |x, y| 0.2 * (2.0 * x + y).sin() - 0.1);
    for c in [WeingartenCoeffs::MINIMAL, co(1.0, 0.3, -0.4), co(2.0, -1.0, 0.5)] {
        let p = MaProblem::new_unchecked(base.clone(), c, Some(u.clone())).unwrap();
        let a = ma_residual(&u, &p).unwrap();
        let b = ma_residual_operator_form(&u, &p).unwrap();
        assert!(a.sup_diff(&b, 0).unwrap() < 1e-10 * (1.0 + a.sup_norm(0)));
    }
}

#[test]
fn periodic_minimal_solve_converges_quadratically() {
    let chart = torus(32, 1.0);
    let lambda = 1.7;
    let tau = std::f64::consts::TAU;
    let noise = field(&chart, |x, y| (tau * x).sin() * (tau * y).cos() + 0.5 * (2.0 * tau * y).sin());
    let iistar = noise.map(|e| Sym2::scalar(lambda * (1.0 + 0.01 * e)));
    let base = InfinityData::new(Field::constant(&chart, Sym2::IDENTITY), iistar).unwrap();
    let p = MaProblem::new_unchecked(base, WeingartenCoeffs::MINIMAL, None).unwrap();
    let sol = ma_newton_solve(&p, &NewtonConfig::default()).unwrap();
    assert!(sol.newton_trace.len() - 1 <= 8, "{:?}", sol.newton_trace);
    assert!(sol.final_residual() < 1e-10);
    assert!(sol.positivity_certificate > 0.0);
}

#[test]
fn constant_ke_solution_is_recovered_from_a_perturbed_start() {
    let k = 0.5f64;
    let mu = (1.0 + k.sqrt()) / (1.0 - k.sqrt());
    let uc = 0.5 * mu.ln();
    let p = fuchsian_problem(co(1.0, 0.0, -k), uc);
    let chart = p.chart().clone();
    // a bump flat at the fixed margin, so the start has no kinks there
    let w = std::f64::consts::PI / 0.4;
    let start = field(&chart, |x, y| uc + 0.05 * ((x + 0.2) * w).sin().powi(2) * ((y - 1.0) * w).sin().powi(2));
    // the residual floor of this base is about 1e-9
    let cfg = NewtonConfig { tol: 1e-8, initial: Some(start), ..NewtonConfig::default() };
    let sol = ma_newton_solve(&p, &cfg).unwrap();
    let err = sol.u.sup_diff(&Field::constant(&chart, uc), 0).unwrap();
    assert!(err < 1e-9, "{err} {:?}", sol.newton_trace);
}

#[test]
fn hyperbolic_coefficients_are_rejected() {
    let p = fuchsian_problem(co(1.0, 0.0, 2.0), 0.0);
    assert!(matches!(ma_newton_solve(&p, &NewtonConfig::default()), Err(Error::NotElliptic)));
}

/// Minimal surfaces over I* = e^{2f}|dz|² with II* the chart's own Epstein
/// data; the exact solution is known in closed form.
fn minimal_problem(n: usize, dx: f64) -> (MaProblem, ScalarField) {
    let chart = Arc::new(GridChart::rect(n, n, [-0.15, -0.15 + (n - 1) as f64 * dx], [1.0, 1.0 + (n - 1) as f64 * dx]).unwrap());
    let eta = field(&chart, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
    let f = fuchsian_half_plane(&chart).flat_factor().zip_map(&eta, |a, e| a + 0.3 + 0.01 * e).unwrap();
    let base = infinity_data_of_metric(&ConformalMetric::flat(f)).unwrap();
    let exact = eta.map(|e| -0.3 - 0.01 * e);
    (MaProblem::new(base, WeingartenCoeffs::MINIMAL, Some(exact.clone()), 1e-2).unwrap(), exact)
}

#[test]
fn minimal_solution_closes_the_loop_geometrically() {
    let dx = 5e-3;
    let (p, exact) = minimal_problem(64, dx);
    let sol = ma_newton_solve(&p, &NewtonConfig::default()).unwrap();
    assert!(sol.final_residual() < 1e-10);
    assert!(sol.u.sup_diff(&exact, 0).unwrap() < 10.0 * dx * dx);
    let rep = verify_solution_geometrically(&sol, &p).unwrap();
    assert!(rep.mean_curvature_sup < 1e-3, "{rep:?}");
    assert!(rep.tame_margin > 0.0 && rep.ke_defect_sup.is_nan());
    // a wrong u is visibly not minimal
    let mut wrong = sol.clone();
    wrong.u = sol.u.zip_map(&field(sol.u.chart(), |x, y| 0.05 * (20.0 * x).cos() * (y - 1.0)), |a, b| a + b).unwrap();
    let bad = verify_solution_geometrically(&wrong, &p).unwrap();
    assert!(bad.mean_curvature_sup > 100.0 * rep.mean_curvature_sup, "{bad:?}");
}

#[test]
fn det_and_trace_examples() {
    assert_eq!(det_trace_from_bstar(&Mat2::IDENTITY).unwrap(), (0.0, 0.0));
    assert!(det_trace_from_bstar(&Mat2::scalar(-1.0)).is_err());
    let (d, t) = det_trace_from_bstar(&Mat2::scalar(3.0)).unwrap();
    assert!((d - 0.25).abs() < 1e-15 && (t + 1.0).abs() < 1e-15);
}

fn spd(a: f64, b: f64, c: f64) -> Mat2 {
    // symmetric with eigenvalues kept away from −1
    Mat2::new(0.2 + a * a, b, b, 0.2 + c * c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn det_trace_matches_the_dictionary(a in -2.0..2.0f64, b in -1.0..1.0f64, c in -2.0..2.0f64) {
        let m = spd(a, b, c);
        let chart = rect(5, 5, [0.0, 1.0], [0.0, 1.0]);
        let bf = b_from_bstar(&Field::constant(&chart, m)).unwrap().get(0);
        let dt = det_trace_field(&Field::constant(&chart, m)).unwrap().get(0);
        prop_assert!((bf.det() - dt.0).abs() < 1e-9 * (1.0 + dt.0.abs()));
        prop_assert!((bf.trace() - dt.1).abs() < 1e-9 * (1.0 + dt.1.abs()));
    }

    #[test]
    fn umbilic_residuals_vanish_together(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, kappa in -0.9..0.9f64) {
        let w = co(a, b, c);
        prop_assume!(w.alpha().abs() > 1e-3);
        let lambda = (1.0 - kappa) / (1.0 + kappa);
        let surface = a * kappa * kappa + b * kappa + c;
        let expect = 4.0 * w.alpha() * surface / (1.0 + kappa).powi(2);
        let got = umbilic_infinity_residual(&w, lambda);
        prop_assert!((got - expect).abs() < 1e-10 * (1.0 + expect.abs()), "{got} vs {expect}");
    }
}
