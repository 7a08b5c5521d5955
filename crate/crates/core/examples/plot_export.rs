//! Front and Lagrangian projection plots of curves in R^3, written as
//! SVG plus CSV into a directory (default: the system temp dir).
//!
//! cargo run --example plot_export [out_dir]

use std::path::PathBuf;

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::chords::{chords_projection, ChordSearch};
use reeb_slices::cli::{export_plot, PlotKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let jobs = [
        ("unknot", PlotKind::Front),
        ("circle", PlotKind::LagrangianProjection),
        ("sheared_unknot", PlotKind::Chords),
    ];
    for (name, kind) in jobs {
        let e = catalog_get(name, &Params::new())?;
        let chords = chords_projection(&e.model, &e.slice, &ChordSearch::default())?;
        let plot = export_plot(&e.model, &e.slice, &chords, kind)?;
        let stem = dir.join(format!("{name}_{kind:?}").to_lowercase());
        std::fs::write(stem.with_extension("csv"), &plot.csv)?;
        if let Some(svg) = &plot.svg {
            std::fs::write(stem.with_extension("svg"), svg)?;
        }
        println!("{} ({} cusps)", stem.display(), plot.cusps.len());
        for c in &plot.cusps {
            println!("  cusp at t = {:.6}, (x, z) = ({:.4}, {:.4})", c.param, c.point.0, c.point.1);
        }
    }
    Ok(())
}
