//! Building the fiberwise function h from the primitive f, then checking
//! the Reeb-derivative bound, the deformed Liouville field at t = 1 and the
//! reparametrized Reeb flow along every chord.
//!
//! cargo run --release --example deformation

use std::sync::Arc;

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::chords::{chords_projection, ChordSearch};
use reeb_slices::collar::{
    check_deformation, extend_h, reeb_reparam_check, DeformationSpec, ExtendOptions, Extension,
};
use reeb_slices::contact::{ContactModel, SymplectizationModel};
use reeb_slices::numerics::Vector;
use reeb_slices::slice::{check_closed, periods, primitive};

fn main() -> reeb_slices::Result<()> {
    let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), 0.1)]))?;
    let closed = check_closed(&e.model, &e.slice, 1e-6)?;
    let f = primitive(&e.model, &e.slice, &periods(&e.model, &e.slice, &closed)?)?;
    let chords = chords_projection(&e.model, &e.slice, &ChordSearch::default())?;

    let h = match extend_h(&e.model, &e.slice, &f, &chords, &ExtendOptions::default())? {
        Extension::Built(h) => h,
        Extension::Obstructed { chords } => {
            println!("obstructed by {} chords", chords.len());
            return Ok(());
        }
    };
    println!("tube radius {:.4}, max |h + f| on the slice {:.1e}", h.tube_radius(), h.max_h_plus_f(64)?);
    let grid = h.verification_grid(&chords, 48);
    let spec = h.into_spec();
    let sym = SymplectizationModel::new(e.model, 0.2);
    let check = check_deformation(&sym, &spec, &grid)?;
    println!(
        "{} grid points: min dh(R) {:.4}, min dt(V + X_H) {:.4}, pass {}",
        check.points, check.min_dh_reeb, check.min_dt_component, check.pass
    );
    let reparam = reeb_reparam_check(&e.model, &spec, &chords)?;
    for c in &reparam.chords {
        println!(
            "chord: rescaled time {:.6} (predicted {:.6}), endpoint drift {:.1e}",
            c.time, c.predicted_time, c.drift
        );
    }

    // a hand-written h with dh(R) = -(1 - delta), inside and outside the margin
    let r3 = ContactModel::StandardR { n: 2 };
    let sym = SymplectizationModel::new(r3, 0.2);
    let probe: Vec<Vector> = (0..5).map(|i| Vector::from_vec(vec![0.1 * i as f64, -0.2, 0.3])).collect();
    for delta in [0.2, -1.0] {
        let slope = 1.0 - delta;
        let spec = DeformationSpec::new(Arc::new(move |p: &Vector| -slope * p[2]), 0.05);
        let c = check_deformation(&sym, &spec, &probe)?;
        println!(
            "h = -{slope} z: min dh(R) {:+.6}, min dt {:+.6}, pass {} (bounds agree: {})",
            c.min_dh_reeb, c.min_dt_component, c.pass, c.agree
        );
    }
    Ok(())
}
