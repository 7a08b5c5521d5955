//! Reeb chords of the unknot and the sheared family, found by projection
//! double points and by shooting along the Reeb flow.
//!
//! cargo run --release --example unknot_chords

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::chords::{chords_projection, chords_shooting, landing_error, ChordSearch};

fn main() -> reeb_slices::Result<()> {
    let opts = ChordSearch::default();
    let e = catalog_get("unknot", &Params::new())?;
    let by_projection = chords_projection(&e.model, &e.slice, &opts)?;
    let by_shooting = chords_shooting(&e.model, &e.slice, &opts)?;
    for (label, chords) in [("projection", &by_projection), ("shooting", &by_shooting)] {
        for c in chords.iter() {
            println!(
                "{label:<10} t {:.6} -> {:.6}  length {:.9}  landing error {:.1e}",
                c.start_param.coords[0],
                c.end_param.coords[0],
                c.length,
                landing_error(&e.model, c, 1e-12)?
            );
        }
    }

    println!("\nsheared unknot: length against 4/3 + 2c");
    for c in [-0.5, -0.25, 0.0, 0.25, 0.5] {
        let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), c)]))?;
        let chords = chords_projection(&e.model, &e.slice, &opts)?;
        let lengths: Vec<String> = chords.iter().map(|ch| format!("{:.9}", ch.length)).collect();
        println!("  c = {c:+.2}: [{}]  expected {:.9}", lengths.join(", "), 4.0 / 3.0 + 2.0 * c);
    }
    Ok(())
}
