//! Reeb fields of the built-in models and the closed Hopf flow on S^3.
//!
//! cargo run --example reeb_fields

use std::f64::consts::PI;

use reeb_slices::contact::ContactModel;
use reeb_slices::numerics::{integrate_flow, Vector};

fn main() -> reeb_slices::Result<()> {
    for name in ["r3", "r5", "r7", "s3", "s5"] {
        let model = ContactModel::from_name(name)?;
        let mut p = Vector::from_fn(model.ambient_dim(), |i, _| 0.3 + 0.1 * i as f64);
        if !model.is_standard_r() {
            p = model.normalize(&(p.clone() / p.norm()))?;
        }
        let r = model.reeb_at(&p)?;
        let frame = model.tangent_frame(&p);
        let worst = (0..frame.ncols())
            .map(|j| model.d_alpha(&p, &r, &frame.column(j).into_owned()).map(f64::abs))
            .collect::<reeb_slices::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "{name}: contact dim {}, alpha(R) - 1 = {:+.1e}, max |d alpha(R, v)| = {worst:.1e}",
            model.contact_dim(),
            model.alpha(&p, &r)? - 1.0
        );
    }

    // the Hopf flow on S^3 has period pi with the 1/2 normalisation
    let s3 = ContactModel::StandardSphere { n: 2 };
    let p = Vector::from_vec(vec![0.6, 0.0, 0.0, 0.8]);
    let q = integrate_flow(|x| s3.reeb_field(x), &p, PI, 1e-10)?;
    println!("Hopf closure after time pi: |flow(p) - p| = {:.2e}", (q - &p).norm());
    Ok(())
}
