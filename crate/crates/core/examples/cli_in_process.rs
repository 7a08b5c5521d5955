//! Driving the command line from code: write a manifest for a catalog
//! entry, then run `check`, `chords` and `collar` on it.
//!
//! cargo run --release --example cli_in_process

use reeb_slices::catalog::Params;
use reeb_slices::cli::{run, Manifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("reebslice-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("unknot.toml");
    std::fs::write(&path, Manifest::for_catalog("unknot", Params::new())?.to_toml())?;
    let manifest = path.to_str().expect("utf-8 temp path");

    for cmd in ["check", "chords", "collar"] {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["reebslice", cmd, manifest], &mut out, &mut err);
        let text = String::from_utf8(out)?;
        println!("$ reebslice {cmd} unknot.toml   # exit {code}");
        for line in text.lines().take(12) {
            println!("{line}");
        }
        print!("{}", String::from_utf8(err)?);
    }
    Ok(())
}
