//! Serialized outputs: JSON documents and CSV chord tables, with every
//! float printed to 9 significant digits.

use serde::Serialize;
use serde_json::Value;

use crate::chords::ChordRecord;

/// `x` rounded to 9 significant digits, with `-0` folded into `0`.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let r = sig9(x);
    if r != 0.0 && r.is_finite() && (r.abs() < 1e-4 || r.abs() >= 1e12) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig9(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with sorted keys, rounded floats and a trailing newline.
pub fn to_document<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// One row per chord: index, length, purity, components, action, both
/// endpoints in parameter and ambient coordinates, residual, isolation.
pub fn chord_table(chords: &[ChordRecord], actions: &[Option<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let k = chords.first().map_or(1, |c| c.start_param.coords.len());
    let m = chords.first().map_or(0, |c| c.start_point.len());
    let mut header = vec![
        "index".to_string(),
        "length".into(),
        "pure".into(),
        "start_component".into(),
        "end_component".into(),
        "action".into(),
        "start_sheet".into(),
    ];
    header.extend((0..k).map(|j| format!("start_u{j}")));
    header.push("end_sheet".into());
    header.extend((0..k).map(|j| format!("end_u{j}")));
    header.extend((0..m).map(|j| format!("start_x{j}")));
    header.extend((0..m).map(|j| format!("end_x{j}")));
    header.extend(["residual".into(), "isolated".into()]);
    w.write_record(&header).expect("in-memory write");
    for (i, c) in chords.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            fmt9(c.length),
            c.pure.to_string(),
            c.start_component.to_string(),
            c.end_component.to_string(),
            actions.get(i).copied().flatten().map(fmt9).unwrap_or_default(),
            c.start_param.sheet.to_string(),
        ];
        row.extend(c.start_param.coords.iter().map(|&x| fmt9(x)));
        row.push(c.end_param.sheet.to_string());
        row.extend(c.end_param.coords.iter().map(|&x| fmt9(x)));
        row.extend(c.start_point.iter().map(|&x| fmt9(x)));
        row.extend(c.end_point.iter().map(|&x| fmt9(x)));
        row.push(fmt9(c.residual));
        row.push(c.isolated.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(sig9(4.0 / 3.0), 1.33333333);
        assert_eq!(sig9(-1e-20), -1e-20);
        assert_eq!(sig9(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(fmt9(0.1 + 0.2), "0.3");
        assert_eq!(fmt9(5.306209651e-18), "5.30620965e-18");
        assert_eq!(fmt9(0.0), "0");
    }

    #[test]
    fn document_rounds_nested_floats() {
        let v = serde_json::json!({"a": [1.0000000001, 2], "b": {"c": std::f64::consts::PI}});
        let s = to_document(&v);
        assert!(s.contains("3.14159265"));
        assert!(!s.contains("3.141592653"));
        assert!(s.contains("\"a\": [\n    1.0,\n    2\n  ]"));
    }
}
