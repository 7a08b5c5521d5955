//! Collarability reports for the sheared unknot under both sign
//! conventions for the small-chord inequality.
//!
//! cargo run --release --example collar_report [c]

use reeb_slices::catalog::{catalog_get, Params};
use reeb_slices::collar::{collar_report, Convention, ReportOptions};

fn main() -> reeb_slices::Result<()> {
    let c: f64 = std::env::args().nth(1).map_or(Ok(-0.5), |s| s.parse()).expect("c must be a number");
    let e = catalog_get("sheared_unknot", &Params::from([("c".to_string(), c)]))?;
    for convention in [Convention::PaperEq2, Convention::DerivedFeasibility] {
        let opts = ReportOptions {
            convention,
            ..ReportOptions::default()
        };
        let report = collar_report(&e.model, &e.slice, &opts);
        println!("[{convention}] verdict {} (exit code {})", report.verdict.name(), report.verdict.exit_code());
        for ch in &report.chords {
            println!(
                "  chord length {:.9} action {:?}  paper-eq2 {:?}  derived {:?}",
                ch.length, ch.action, ch.paper_eq2, ch.derived_feasibility
            );
        }
        if let Some(h) = &report.h_diagnostics {
            println!(
                "  h: min dh(R) {:.4}, max |h + f| {:.1e}, deformation check {}",
                h.min_dh_reeb, h.max_h_plus_f, h.deformation.pass
            );
        }
        for note in &report.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}
