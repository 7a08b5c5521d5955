use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn manifest(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("manifests").join(format!("{name}.toml"))
}

fn reebslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reebslice")).args(args).output().expect("binary runs")
}

fn run_on(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let path = manifest(name);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    reebslice(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn csv_rows(o: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(o.stdout.as_slice()).records().map(Result::unwrap).collect()
}

#[test]
fn check_exit_codes() {
    let o = run_on("check", "unknot", &[]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert!(doc["closed"]["max_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(doc["periods"][0]["value"].as_f64(), Some(0.0));

    let o = run_on("check", "vertical_segment", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["transverse"]["min_sigma"].as_f64().unwrap() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "model = \"r3\"\n[slice\n").unwrap();
    let o = reebslice(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed manifest"));

    let o = reebslice(&["check", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emitted_manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("effective.toml");
    let o = run_on(
        "check",
        "sheared_unknot",
        &["--emit-manifest", out.to_str().unwrap(), "--margin", "0.1", "--convention", "derived-feasibility"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let m = reeb_slices::cli::Manifest::parse(&text).unwrap();
    assert_eq!(m.tolerances.margin, 0.1);
    assert_eq!(m.convention, reeb_slices::collar::Convention::DerivedFeasibility);
    assert_eq!(reeb_slices::cli::Manifest::parse(&m.to_toml()).unwrap(), m);
    // the emitted file drives the same check
    let again = reebslice(&["check", out.to_str().unwrap()]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn chord_tables() {
    let o = run_on("chords", "unknot", &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    let length: f64 = rows[0][1].parse().unwrap();
    assert!((length - 4.0 / 3.0).abs() < 1e-6);

    let o = run_on("chords", "circle", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(csv_rows(&o).is_empty());
    assert!(stdout(&o).starts_with("index,length"));

    let o = run_on("chords", "sheared_unknot", &["--method", "shooting"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "0.333333333");
    assert_eq!(&rows[0][5], "1");
}

#[test]
fn chords_refuse_failed_checks_unless_forced() {
    let o = run_on("chords", "twisted_torus", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
}

#[test]
fn chord_table_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chords.csv");
    let o = run_on("chords", "unknot", &["-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), o.stdout);
}

#[test]
fn collar_exit_codes() {
    let cases = [
        ("unknot", 0, "collarable"),
        ("circle", 4, "non-exact"),
        ("sheared_unknot", 3, "scheme-obstructed"),
        ("vertical_segment", 5, "not-a-slice"),
        ("twisted_torus", 5, "not-a-slice"),
    ];
    for (name, code, kind) in cases {
        let o = run_on("collar", name, &[]);
        assert_eq!(o.status.code(), Some(code), "{name}");
        assert_eq!(json(&o)["verdict"]["kind"], kind, "{name}");
    }
}

#[test]
fn collar_report_schema_and_disagreement() {
    let o = run_on("collar", "sheared_unknot", &[]);
    let doc = json(&o);
    for key in ["checks", "periods", "chords", "conventions", "verdict", "h_diagnostics"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["conventions"]["active"], "paper-eq2");
    assert_eq!(doc["conventions"]["disagreements"], serde_json::json!([0]));
    assert_eq!(doc["chords"][0]["paper_eq2"], "small");
    assert_eq!(doc["chords"][0]["derived_feasibility"], "long");
    assert!(doc["verdict"]["message"].as_str().unwrap().contains("NOT concluded"));

    let o = run_on("collar", "sheared_unknot", &["--convention", "derived-feasibility"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn export_plots() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("front");
    let o = run_on("export-plot", "unknot", &["--what", "front", "-o", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(prefix.with_extension("svg")).unwrap();
    assert_eq!(svg.matches("class=\"cusp\"").count(), 2);
    let data = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(data.lines().filter(|l| l.starts_with("cusp,")).count(), 2);

    // byte-identical on a second run
    let again = dir.path().join("again");
    run_on("export-plot", "unknot", &["--what", "front", "-o", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(again.with_extension("svg")).unwrap(), svg.as_bytes());

    let o = run_on("export-plot", "sheared_unknot", &["--what", "chords"]);
    let marks: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("chord,")).map(String::from).collect();
    assert_eq!(marks.len(), 1);
    let f: Vec<f64> = marks[0].split(',').skip(3).map(|x| x.parse().unwrap()).collect();
    assert!(f[0].abs() < 1e-6 && f[1].abs() < 1e-6, "{marks:?}");

    let o = run_on("export-plot", "torus_r5", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UnsupportedProjection"));
}

#[test]
fn catalog_commands() {
    let o = reebslice(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["unknot", "sheared_unknot", "circle", "torus_r5", "vertical_segment", "hopf_circle"] {
        assert!(text.contains(name), "{name}");
    }

    let o = reebslice(&["catalog", "show", "sheared_unknot", "--param", "c=0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["params"]["c"], 0.25);
    assert_eq!(doc["expected"]["pure_chord_lengths"][0], 1.83333333);

    let o = reebslice(&["catalog", "show", "sheared_unknot", "--param", "c=-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = reebslice(&["catalog", "show", "trefoil"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors() {
    assert_eq!(reebslice(&[]).status.code(), Some(2));
    assert_eq!(reebslice(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(reebslice(&["--help"]).status.code(), Some(0));
    let o = run_on("collar", "unknot", &["--margin", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}
