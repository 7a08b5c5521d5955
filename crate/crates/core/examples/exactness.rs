//! Periods of i*alpha and the primitive f for exact slices.
//!
//! cargo run --example exactness

use std::f64::consts::{FRAC_PI_2, PI};

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::slice::{check_closed, periods, primitive, ParamPoint};

fn main() -> reeb_slices::Result<()> {
    for name in ["circle", "torus_r5", "unknot", "sheared_unknot"] {
        let e = catalog_get(name, &Params::new())?;
        let closed = check_closed(&e.model, &e.slice, 1e-6)?;
        let ps = periods(&e.model, &e.slice, &closed)?;
        let values: Vec<String> = ps.iter().map(|p| format!("{:.9}", p.value)).collect();
        println!("{name:<15} periods [{}]  (pi = {PI:.9})", values.join(", "));
    }

    // f = c sin t up to a constant for the sheared unknot
    let c = -0.5;
    let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), c)]))?;
    let closed = check_closed(&e.model, &e.slice, 1e-6)?;
    let ps = periods(&e.model, &e.slice, &closed)?;
    let f = primitive(&e.model, &e.slice, &ps)?;
    let at = |t: f64| f.value_at(&e.model, &e.slice, &ParamPoint::new(0, vec![t]));
    println!(
        "sheared unknot c = {c}: f(pi/2) - f(3pi/2) = {:.9} (expected {:.9})",
        at(FRAC_PI_2)? - at(3.0 * FRAC_PI_2)?,
        2.0 * c
    );
    Ok(())
}
