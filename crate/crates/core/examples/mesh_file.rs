//! Reading a slice from a delimited mesh file and running the checks on it.
//! The mesh here samples the unknot; any CSV with parameter columns followed
//! by ambient columns works the same way.
//!
//! cargo run --example mesh_file

use std::f64::consts::TAU;
use std::fmt::Write as _;

use reeb_slices::chords::{chords_projection, ChordSearch};
use reeb_slices::contact::ContactModel;
use reeb_slices::slice::{check_closed, check_transverse, read_mesh_csv};

fn main() -> reeb_slices::Result<()> {
    let n = 400;
    let mut text = String::from("t,x,y,z\n");
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        let (x, y, z) = (t.cos(), -(2.0 * t).sin(), 2.0 / 3.0 * t.sin().powi(3));
        writeln!(text, "{t},{x},{y},{z}").unwrap();
    }

    let model = ContactModel::StandardR { n: 2 };
    let slice = read_mesh_csv(text.as_bytes(), "unknot_mesh", &[true], 1)?;
    println!("{} nodes, analytic jacobian: {}", slice.node_count(), slice.has_analytic_jacobian());
    let closed = check_closed(&model, &slice, 1e-6)?;
    let transverse = check_transverse(&model, &slice, 1e-4)?;
    println!("closed {}, transverse {} (min sigma {:.4})", closed.pass, transverse.pass, transverse.min_sigma);
    for c in chords_projection(&model, &slice, &ChordSearch::default())? {
        println!("chord length {:.6} (exact 4/3 = {:.6})", c.length, 4.0 / 3.0);
    }
    Ok(())
}
