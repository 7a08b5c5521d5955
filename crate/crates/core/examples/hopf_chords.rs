//! Shooting for chords of a Legendrian great circle in S^3. Every point
//! of the circle returns to it after time pi/2 (its antipode), so the
//! chords come in a one-parameter family and are flagged as non-isolated.
//!
//! cargo run --release --example hopf_chords

use std::f64::consts::FRAC_PI_2;

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::chords::{chords_shooting, landing_error, ChordSearch};

fn main() -> reeb_slices::Result<()> {
    let e = catalog_get("hopf_circle", &Params::new())?;
    let opts = ChordSearch {
        max_time: 2.0,
        ..ChordSearch::default()
    };
    let chords = chords_shooting(&e.model, &e.slice, &opts)?;
    let worst_length = chords.iter().map(|c| (c.length - FRAC_PI_2).abs()).fold(0.0, f64::max);
    let mut worst_landing: f64 = 0.0;
    for c in &chords {
        worst_landing = worst_landing.max(landing_error(&e.model, c, 1e-12)?);
    }
    let isolated = chords.iter().filter(|c| c.isolated).count();
    println!("{} chords, {isolated} isolated", chords.len());
    println!("max |length - pi/2| = {worst_length:.2e}");
    println!("max landing error   = {worst_landing:.2e}");
    if let Some(c) = chords.first() {
        println!(
            "first: theta {:.6} -> {:.6}, start {:?}",
            c.start_param.coords[0],
            c.end_param.coords[0],
            c.start_point.as_slice()
        );
    }
    Ok(())
}
