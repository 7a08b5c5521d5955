use proptest::prelude::*;

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::chords::{chords_projection, landing_error, ChordSearch};
use reeb_slices::cli::{fmt9, sig9};
use reeb_slices::collar::{classify_chord, feasibility_oracle_1d, is_long, ChordClassification, Convention};
use reeb_slices::contact::ContactModel;
use reeb_slices::numerics::{jacobian_fd, line_quadrature, newton_solve, Matrix, NewtonOptions, Vector};

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_jacobian_of_affine_maps_is_exact(
        a in prop::collection::vec(-1.0..1.0f64, 6),
        b in prop::collection::vec(-1.0..1.0f64, 2),
        x in prop::collection::vec(-1.0..1.0f64, 3),
        log_step in -6.5..-3.0f64,
    ) {
        let m = Matrix::from_row_slice(2, 3, &a);
        let shift = Vector::from_vec(b);
        let map = |p: &Vector| &m * p + &shift;
        let j = jacobian_fd(map, &Vector::from_vec(x), 10f64.powf(log_step)).unwrap();
        prop_assert!((j - &m).amax() < 1e-9);
    }

    // below a step of about 3e-7 the error is the evaluation roundoff of the
    // map divided by the probe distance, whatever the map
    #[test]
    fn fd_jacobian_error_is_roundoff_for_affine_maps(
        a in prop::collection::vec(-5.0..5.0f64, 6),
        b in prop::collection::vec(-5.0..5.0f64, 2),
        x in prop::collection::vec(-5.0..5.0f64, 3),
        log_step in -7.0..-3.0f64,
    ) {
        let m = Matrix::from_row_slice(2, 3, &a);
        let shift = Vector::from_vec(b);
        let map = |p: &Vector| &m * p + &shift;
        let x = Vector::from_vec(x);
        let step = 10f64.powf(log_step);
        let j = jacobian_fd(map, &x, step).unwrap();
        let scale = 1.0 + m.abs().row_sum().amax() * (1.0 + x.amax()) + shift.amax();
        let bound = 8.0 * f64::EPSILON * scale / step;
        prop_assert!((j - &m).amax() < bound.max(1e-12));
    }

    #[test]
    fn quadrature_is_additive_on_polynomials(
        c in prop::collection::vec(-2.0..2.0f64, 4),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        d in -3.0..3.0f64,
    ) {
        let form = |p: &Vector, v: &Vector| (c[0] + c[1] * p[0] + c[2] * p[0].powi(2) + c[3] * p[0].powi(3)) * v[0];
        let s = |x: f64| Vector::from_vec(vec![x]);
        let ab = line_quadrature(form, &s(a), &s(b), 8).unwrap();
        let bd = line_quadrature(form, &s(b), &s(d), 8).unwrap();
        let ad = line_quadrature(form, &s(a), &s(d), 8).unwrap();
        prop_assert!((ab + bd - ad).abs() < 1e-10);
    }

    #[test]
    fn d_alpha_is_antisymmetric(p in vec3(), u in vec3(), v in vec3()) {
        let model = ContactModel::StandardR { n: 2 };
        let (p, u, v) = (Vector::from_vec(p), Vector::from_vec(u), Vector::from_vec(v));
        let uv = model.d_alpha(&p, &u, &v).unwrap();
        let vu = model.d_alpha(&p, &v, &u).unwrap();
        prop_assert!((uv + vu).abs() < 1e-12);
    }

    #[test]
    fn sphere_reeb_identities(raw in prop::collection::vec(-1.0..1.0f64, 6)) {
        let model = ContactModel::StandardSphere { n: 3 };
        let raw = Vector::from_vec(raw);
        prop_assume!(raw.norm() > 1e-3);
        let p = &raw / raw.norm();
        let r = model.reeb_at(&p).unwrap();
        prop_assert!((model.alpha(&p, &r).unwrap() - 1.0).abs() < 1e-12);
        let frame = model.tangent_frame(&p);
        for j in 0..frame.ncols() {
            prop_assert!(model.d_alpha(&p, &r, &frame.column(j).into_owned()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn newton_is_idempotent_at_a_root(r in prop::collection::vec(-3.0..3.0f64, 2)) {
        let target = Vector::from_vec(r);
        let t = target.clone();
        let system = move |x: &Vector| Vector::from_vec(vec![
            x[0] - t[0] + 0.1 * (x[1] - t[1]).powi(3),
            (x[1] - t[1]) + 0.2 * (x[0] - t[0]).powi(2),
        ]);
        let first = newton_solve(&system, &(target.clone() + Vector::from_vec(vec![0.3, -0.2])), &NewtonOptions::default()).unwrap();
        let second = newton_solve(&system, &first.root, &NewtonOptions::default()).unwrap();
        prop_assert_eq!(second.iterations, 0);
        prop_assert_eq!(second.root, first.root);
    }

    #[test]
    fn derived_convention_is_the_oracle(
        length in 1e-3..10.0f64,
        f_start in -5.0..5.0f64,
        f_end in -5.0..5.0f64,
    ) {
        let action = f_start - f_end;
        prop_assert_eq!(
            is_long(length, action, Convention::DerivedFeasibility),
            feasibility_oracle_1d(length, -f_start, -f_end, 0.0)
        );
        prop_assert_eq!(is_long(length, action, Convention::PaperEq2), length > action);
    }

    #[test]
    fn nine_digit_rounding_is_stable(x in prop::num::f64::NORMAL) {
        let r = sig9(x);
        prop_assert_eq!(sig9(r), r);
        prop_assert!(((r - x) / x).abs() < 1e-8);
        prop_assert_eq!(fmt9(x).parse::<f64>().unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sheared_unknot_family_law(c in -0.6..1.0f64) {
        let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), c)])).unwrap();
        let chords = chords_projection(&e.model, &e.slice, &ChordSearch::default()).unwrap();
        prop_assert_eq!(chords.len(), 1);
        prop_assert!((chords[0].length - (4.0 / 3.0 + 2.0 * c)).abs() < 1e-6);
        prop_assert!(landing_error(&e.model, &chords[0], 1e-12).unwrap() < 1e-6);
        let class = classify_chord(&chords[0], -2.0 * c, Convention::DerivedFeasibility).unwrap();
        prop_assert_eq!(class.classification, ChordClassification::Long);
    }
}
