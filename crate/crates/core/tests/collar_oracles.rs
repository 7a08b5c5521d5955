use std::f64::consts::TAU;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use reeb_slices::catalog::{catalog_get, catalog_list, Params, Tag};
use reeb_slices::chords::{chords_projection, ChordRecord, ChordSearch};
use reeb_slices::collar::{
    check_deformation, chord_action, collar_report, extend_h, feasibility_oracle_1d, reeb_reparam_check,
    ChordClassification, Convention, DeformationSpec, ExtendOptions, Extension, ReportOptions, Verdict,
    DEFAULT_MARGIN,
};
use reeb_slices::contact::{ContactModel, SymplectizationModel};
use reeb_slices::numerics::{Matrix, Vector};
use reeb_slices::slice::{check_closed, periods, primitive, Factor, ParamSlice, PrimitiveField};
use reeb_slices::Error;

const R3: ContactModel = ContactModel::StandardR { n: 2 };

fn sym() -> SymplectizationModel {
    SymplectizationModel::new(R3, 0.2)
}

fn linear(slope: f64) -> DeformationSpec {
    DeformationSpec::new(Arc::new(move |p: &Vector| slope * p[2]), DEFAULT_MARGIN)
}

fn box_grid() -> Vec<Vector> {
    (0..125)
        .map(|i| Vector::from_vec(vec![(i % 5) as f64 * 0.5 - 1.0, (i / 5 % 5) as f64 * 0.5 - 1.0, (i / 25) as f64 * 0.5 - 1.0]))
        .collect()
}

/// The unknot sheared by `c sin t` for any `c`, outside the catalog range.
fn sheared_any(c: f64) -> ParamSlice {
    let immersion = Arc::new(move |_: usize, u: &Vector| {
        let t = u[0];
        Vector::from_vec(vec![t.cos(), -(2.0 * t).sin(), 2.0 / 3.0 * t.sin().powi(3) + c * t.sin()])
    });
    let jacobian = Arc::new(move |_: usize, u: &Vector| {
        let t = u[0];
        Matrix::from_column_slice(3, 1, &[-t.sin(), -2.0 * (2.0 * t).cos(), 2.0 * t.sin().powi(2) * t.cos() + c * t.cos()])
    });
    ParamSlice::new(format!("sheared_{c}"), vec![Factor::circle(0.0, TAU)], 1, immersion, Some(jacobian)).unwrap()
}

fn exact(slice: &ParamSlice) -> (PrimitiveField, Vec<ChordRecord>) {
    let closed = check_closed(&R3, slice, 1e-6).unwrap();
    let f = primitive(&R3, slice, &periods(&R3, slice, &closed).unwrap()).unwrap();
    let chords = chords_projection(&R3, slice, &ChordSearch::default()).unwrap();
    (f, chords)
}

#[test]
fn zero_deformation_keeps_the_liouville_field() {
    let spec = DeformationSpec::zero(DEFAULT_MARGIN);
    let p = Vector::from_vec(vec![0.3, -1.0, 5.0]);
    for t in [0.85, 0.95, 1.0, 1.1] {
        let v = sym().liouville_deformed(&spec, t, &p).unwrap();
        assert_abs_diff_eq!(v[0], t, epsilon = 1e-12);
    }
}

#[test]
fn deformed_dt_component_at_one() {
    let p = Vector::from_vec(vec![0.2, 0.4, -0.3]);
    for delta in [0.1, 0.5, 0.9] {
        let v = sym().liouville_deformed(&linear(-(1.0 - delta)), 1.0, &p).unwrap();
        assert_abs_diff_eq!(v[0], delta, epsilon = 1e-6);
    }
    let constant = DeformationSpec::new(Arc::new(|_: &Vector| 2.5), DEFAULT_MARGIN);
    let v = sym().liouville_deformed(&constant, 1.0, &p).unwrap();
    assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-9);
}

#[test]
fn deformation_check_examples() {
    let grid = box_grid();
    let zero = check_deformation(&sym(), &DeformationSpec::zero(DEFAULT_MARGIN), &grid).unwrap();
    assert_eq!(zero.min_dh_reeb, 0.0);
    assert_abs_diff_eq!(zero.min_dt_component, 1.0, epsilon = 1e-12);
    assert!(zero.pass);

    let delta = 0.2;
    let c = check_deformation(&sym(), &linear(-(1.0 - delta)), &grid).unwrap();
    assert_abs_diff_eq!(c.min_dh_reeb, -(1.0 - delta), epsilon = 1e-6);
    assert!(c.pass && c.agree);

    let c = check_deformation(&sym(), &linear(-2.0), &grid).unwrap();
    assert!(!c.pass_dh_reeb && !c.pass_dt_component && c.agree);
}

#[test]
fn extension_for_the_unknot_is_flat_on_the_slice() {
    let e = catalog_get("unknot", &Params::new()).unwrap();
    let (f, chords) = exact(&e.slice);
    let Extension::Built(h) = extend_h(&R3, &e.slice, &f, &chords, &ExtendOptions::default()).unwrap() else {
        panic!("unknot must extend");
    };
    assert!(h.max_h_plus_f(64).unwrap() < 1e-6);
    let grid = h.verification_grid(&chords, 24);
    let c = check_deformation(&sym(), &h.into_spec(), &grid).unwrap();
    assert!(c.pass && c.min_dh_reeb > -1.0 + DEFAULT_MARGIN);
}

#[test]
fn extension_for_a_positive_shear() {
    let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), 0.1)])).unwrap();
    let (f, chords) = exact(&e.slice);
    let a = chord_action(&R3, &e.slice, &f, &chords[0]).unwrap();
    // mean slope along the chord is (h_end - h_start) / length = a / length
    assert_abs_diff_eq!(a / chords[0].length, -0.2 / 1.533_333_333_333_333_3, epsilon = 1e-6);
    let built = extend_h(&R3, &e.slice, &f, &chords, &ExtendOptions::default()).unwrap();
    let Extension::Built(h) = built else { panic!("c = 0.1 must extend") };
    assert!(h.max_h_plus_f(64).unwrap() < 1e-6);
}

#[test]
fn steep_prescription_is_obstructed() {
    // c = -4/3 puts the lower end at t = pi/2 and makes h_end - h_start = -2 length
    let slice = sheared_any(-4.0 / 3.0);
    let (f, chords) = exact(&slice);
    assert_eq!(chords.len(), 1);
    let a = chord_action(&R3, &slice, &f, &chords[0]).unwrap();
    assert_abs_diff_eq!(a, -2.0 * chords[0].length, epsilon = 1e-6);
    match extend_h(&R3, &slice, &f, &chords, &ExtendOptions::default()).unwrap() {
        Extension::Obstructed { chords: bad } => assert_eq!(bad, chords),
        Extension::Built(_) => panic!("must be obstructed"),
    }
}

#[test]
fn obstruction_matches_the_oracle_chord_by_chord() {
    let margin = ExtendOptions::default().margin;
    let mut slices: Vec<ParamSlice> = [-1.2, -0.5, 0.0, 0.1, 0.5, 12.0, 13.0]
        .iter()
        .map(|&c| sheared_any(c))
        .collect();
    for info in catalog_list() {
        let e = catalog_get(info.name, &Params::new()).unwrap();
        if e.model == R3 && e.has_tag(Tag::Exact) && e.has_tag(Tag::Slice) {
            slices.push(e.slice);
        }
    }
    let (mut built, mut obstructed) = (0, 0);
    for slice in &slices {
        let (f, chords) = exact(slice);
        let any_fails = chords.iter().filter(|c| c.pure).any(|c| {
            let a = chord_action(&R3, slice, &f, c).unwrap();
            !feasibility_oracle_1d(c.length, 0.0, a, margin)
        });
        let result = extend_h(&R3, slice, &f, &chords, &ExtendOptions::default()).unwrap();
        assert_eq!(matches!(result, Extension::Obstructed { .. }), any_fails, "{}", slice.name());
        if any_fails {
            obstructed += 1;
        } else {
            built += 1;
        }
    }
    assert!(built > 0 && obstructed > 0);
}

#[test]
fn extension_requires_standard_r() {
    let e = catalog_get("hopf_circle", &Params::new()).unwrap();
    let closed = check_closed(&e.model, &e.slice, 1e-6).unwrap();
    let f = primitive(&e.model, &e.slice, &periods(&e.model, &e.slice, &closed).unwrap()).unwrap();
    assert!(matches!(
        extend_h(&e.model, &e.slice, &f, &[], &ExtendOptions::default()),
        Err(Error::WrongModel(_))
    ));
}

#[test]
fn reparametrized_flow_keeps_endpoints() {
    let e = catalog_get("unknot", &Params::new()).unwrap();
    let chords = chords_projection(&R3, &e.slice, &ChordSearch::default()).unwrap();

    let zero = reeb_reparam_check(&R3, &DeformationSpec::zero(DEFAULT_MARGIN), &chords).unwrap();
    assert!(zero.max_drift < 1e-8 && zero.pass);
    assert_abs_diff_eq!(zero.chords[0].time, 4.0 / 3.0, epsilon = 1e-8);

    // bump of height 0.3 centred above the chord midpoint
    let bump = DeformationSpec::new(
        Arc::new(|p: &Vector| 0.3 * (-(p[0] * p[0] + p[1] * p[1] + (p[2] - 0.3).powi(2)) / 0.09).exp()),
        DEFAULT_MARGIN,
    );
    let r = reeb_reparam_check(&R3, &bump, &chords).unwrap();
    assert!(r.max_drift < 1e-5 && r.pass);
    assert!((r.chords[0].time - 4.0 / 3.0).abs() > 1e-2);
    assert_abs_diff_eq!(r.chords[0].time, r.chords[0].predicted_time, epsilon = 1e-6);

    // dh(R) reaches -1.2 at the chord midpoint z = 0
    let cliff = DeformationSpec::new(
        Arc::new(|p: &Vector| -1.2 * p[2] * (-p[2] * p[2] / 0.01).exp()),
        DEFAULT_MARGIN,
    );
    assert!(matches!(
        reeb_reparam_check(&R3, &cliff, &chords),
        Err(Error::ReparamDegenerate { .. })
    ));
}

#[test]
fn report_examples() {
    let opts = ReportOptions::default();
    let e = catalog_get("unknot", &Params::new()).unwrap();
    let r = collar_report(&e.model, &e.slice, &opts);
    assert_eq!(r.verdict, Verdict::Collarable);
    assert_eq!(r.chords.len(), 1);
    assert_eq!(r.chords[0].paper_eq2, Some(ChordClassification::Long));
    assert_eq!(r.chords[0].derived_feasibility, Some(ChordClassification::Long));
    let h = r.h_diagnostics.unwrap();
    assert!(h.deformation.pass && h.max_h_plus_f < 1e-6);

    let e = catalog_get("circle", &Params::new()).unwrap();
    let r = collar_report(&e.model, &e.slice, &opts);
    assert_eq!(r.verdict, Verdict::NonExact);
    assert_abs_diff_eq!(r.periods[0].value, std::f64::consts::PI, epsilon = 1e-8);
    assert!(r.chords.is_empty());

    let e = catalog_get("vertical_segment", &Params::new()).unwrap();
    assert!(matches!(collar_report(&e.model, &e.slice, &opts).verdict, Verdict::NotASlice { .. }));

    let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), 0.1)])).unwrap();
    for convention in [Convention::PaperEq2, Convention::DerivedFeasibility] {
        let r = collar_report(&e.model, &e.slice, &ReportOptions { convention, ..opts.clone() });
        assert_eq!(r.verdict, Verdict::Collarable, "{convention}");
        assert!(r.conventions.disagreements.is_empty());
    }
}

#[test]
fn mixed_chords_stay_out_of_the_verdict() {
    let e = catalog_get("unknot_pair", &Params::new()).unwrap();
    let r = collar_report(&e.model, &e.slice, &ReportOptions::default());
    assert!(r.chords.iter().any(|c| !c.pure));
    for c in r.chords.iter().filter(|c| !c.pure) {
        assert_eq!(c.action, None);
        assert_eq!(c.paper_eq2, None);
    }
    assert_eq!(r.verdict, Verdict::Collarable);
}
