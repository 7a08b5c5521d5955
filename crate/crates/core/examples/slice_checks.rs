//! Closedness and transversality of every catalog entry, plus a slice
//! whose pullback is not closed.
//!
//! cargo run --example slice_checks

use std::f64::consts::TAU;
use std::sync::Arc;

use reeb_slices::catalog::{catalog_get, catalog_list, Params};
use reeb_slices::contact::ContactModel;
use reeb_slices::numerics::Vector;
use reeb_slices::slice::{check_closed, check_transverse, Factor, ParamSlice};

fn main() -> reeb_slices::Result<()> {
    for info in catalog_list() {
        let e = catalog_get(info.name, &Params::new())?;
        let closed = check_closed(&e.model, &e.slice, 1e-6)?;
        let transverse = check_transverse(&e.model, &e.slice, 1e-4)?;
        println!(
            "{:<18} closed {:<5} (residual {:.2e})  transverse {:<5} (min sigma {:.3e})",
            info.name, closed.pass, closed.max_residual, transverse.pass, transverse.min_sigma
        );
    }

    // a custom torus in R^5 whose second y-coordinate leans on the first
    // angle: i*alpha gains sin(a) sin(b) db, and d of that is cos(a) sin(b)
    let immersion = Arc::new(|_sheet: usize, u: &Vector| {
        let (a, b) = (u[0], u[1]);
        Vector::from_vec(vec![a.cos(), a.sin(), b.cos(), b.sin() + a.sin(), 0.0])
    });
    let model = ContactModel::StandardR { n: 3 };
    let circle = Factor {
        nodes: 64,
        ..Factor::circle(0.0, TAU)
    };
    let twisted = ParamSlice::new(
        "coupled_torus",
        vec![circle, circle],
        1,
        immersion,
        None,
    )?;
    let closed = check_closed(&model, &twisted, 1e-6)?;
    println!("coupled_torus      closed {} (residual {:.3})", closed.pass, closed.max_residual);
    Ok(())
}
