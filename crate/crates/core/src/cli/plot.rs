//! Plot data for curves in `StandardR(2)`: the front `(x, z)`, the
//! Lagrangian projection `(x, y)`, and the projection with chord double
//! points marked. Output is SVG plus CSV, both with fixed formatting so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use clap::ValueEnum;

use crate::chords::ChordRecord;
use crate::contact::ContactModel;
use crate::error::Result;
use crate::numerics::Vector;
use crate::slice::ParamSlice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Front,
    LagrangianProjection,
    Chords,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cusp {
    pub sheet: usize,
    pub param: f64,
    pub point: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOutput {
    /// `None` when the model or dimension has no planar picture.
    pub svg: Option<String>,
    pub csv: String,
    pub cusps: Vec<Cusp>,
    pub warning: Option<String>,
}

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

pub fn export_plot(
    model: &ContactModel,
    slice: &ParamSlice,
    chords: &[ChordRecord],
    kind: PlotKind,
) -> Result<PlotOutput> {
    if *model != (ContactModel::StandardR { n: 2 }) || slice.param_dim() != 1 {
        return Ok(raw_export(model, slice, chords));
    }
    let axes = match kind {
        PlotKind::Front => (0, 2),
        PlotKind::LagrangianProjection | PlotKind::Chords => (0, 1),
    };
    let f = slice.factors()[0];
    let per_sheet = slice.nodes_per_sheet();
    let mut csv = String::from("kind,sheet,param,a,b\n");
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for sheet in 0..slice.sheets() {
        let mut line = Vec::with_capacity(per_sheet + 1);
        for i in 0..per_sheet {
            let id = sheet * per_sheet + i;
            let p = slice.node_param(id);
            let x = slice.point(&p);
            let q = (x[axes.0], x[axes.1]);
            writeln!(csv, "point,{sheet},{:.6},{:.6},{:.6}", p.coords[0], q.0, q.1).expect("string write");
            line.push(q);
        }
        if f.periodic {
            line.push(line[0]);
        }
        lines.push(line);
    }

    let cusps = if kind == PlotKind::Front {
        front_cusps(slice)?
    } else {
        Vec::new()
    };
    for c in &cusps {
        writeln!(csv, "cusp,{},{:.6},{:.6},{:.6}", c.sheet, c.param, c.point.0, c.point.1).expect("string write");
    }
    let marks: Vec<(f64, f64)> = if kind == PlotKind::Chords {
        chords.iter().map(|c| (c.start_point[0], c.start_point[1])).collect()
    } else {
        Vec::new()
    };
    for (c, m) in chords.iter().zip(&marks) {
        writeln!(
            csv,
            "chord,{},{:.6},{:.6},{:.6}",
            c.start_param.sheet, c.start_param.coords[0], m.0, m.1
        )
        .expect("string write");
    }

    let svg = render_svg(&lines, &cusps.iter().map(|c| c.point).collect::<Vec<_>>(), &marks, kind);
    Ok(PlotOutput {
        svg: Some(svg),
        csv,
        cusps,
        warning: None,
    })
}

/// Zeros of `x'` along each sheet: nodes where it vanishes exactly, plus
/// sign changes between neighbouring nodes refined by bisection.
fn front_cusps(slice: &ParamSlice) -> Result<Vec<Cusp>> {
    let f = slice.factors()[0];
    let per_sheet = slice.nodes_per_sheet();
    let mut out = Vec::new();
    for sheet in 0..slice.sheets() {
        let dx = |t: f64| -> Result<f64> { Ok(slice.jacobian_at(sheet, &Vector::from_element(1, t))?[(0, 0)]) };
        let params: Vec<f64> = (0..per_sheet)
            .map(|i| slice.node_param(sheet * per_sheet + i).coords[0])
            .collect();
        let values: Vec<f64> = params.iter().map(|&t| dx(t)).collect::<Result<_>>()?;
        let pairs = if f.periodic { per_sheet } else { per_sheet - 1 };
        let mut zeros = Vec::new();
        for i in 0..per_sheet {
            if values[i] == 0.0 {
                zeros.push(params[i]);
            }
            let j = (i + 1) % per_sheet;
            if i < pairs && values[i] * values[j] < 0.0 {
                let (mut a, mut b) = (params[i], params[i] + f.spacing());
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if dx(mid)? * values[i] > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                zeros.push(0.5 * (a + b));
            }
        }
        for t in zeros {
            let x = slice.point_at(sheet, &Vector::from_element(1, t));
            out.push(Cusp {
                sheet,
                param: t,
                point: (x[0], x[2]),
            });
        }
    }
    Ok(out)
}

fn render_svg(lines: &[Vec<(f64, f64)>], cusps: &[(f64, f64)], marks: &[(f64, f64)], kind: PlotKind) -> String {
    let all = lines.iter().flatten().chain(cusps).chain(marks);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (SIZE - 2.0 * PAD) / span;
    let map = |(x, y): (f64, f64)| (PAD + (x - x0) * scale, SIZE - PAD - (y - y0) * scale);

    let (xl, yl) = match kind {
        PlotKind::Front => ("x", "z"),
        _ => ("x", "y"),
    };
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .expect("string write");
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").expect("string write");
    writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\">{xl} \u{2192}, {yl} \u{2191}</text>", PAD, PAD - 8.0)
        .expect("string write");
    for line in lines {
        let pts: Vec<String> = line
            .iter()
            .map(|&p| {
                let (a, b) = map(p);
                format!("{a:.6},{b:.6}")
            })
            .collect();
        writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        )
        .expect("string write");
    }
    for &c in cusps {
        let (a, b) = map(c);
        writeln!(
            s,
            "<g class=\"cusp\"><circle cx=\"{a:.6}\" cy=\"{b:.6}\" r=\"4\" fill=\"none\" stroke=\"blue\"/><text x=\"{:.6}\" y=\"{:.6}\" font-size=\"10\" fill=\"blue\">cusp</text></g>",
            a + 6.0,
            b - 6.0
        )
        .expect("string write");
    }
    for &m in marks {
        let (a, b) = map(m);
        writeln!(
            s,
            "<g class=\"chord\"><circle cx=\"{a:.6}\" cy=\"{b:.6}\" r=\"5\" fill=\"red\"/></g>"
        )
        .expect("string write");
    }
    s.push_str("</svg>\n");
    s
}

/// Node and chord coordinates without a picture.
fn raw_export(model: &ContactModel, slice: &ParamSlice, chords: &[ChordRecord]) -> PlotOutput {
    let k = slice.param_dim();
    let m = model.ambient_dim();
    let mut csv = String::from("kind,sheet");
    for j in 0..k {
        write!(csv, ",u{j}").expect("string write");
    }
    for j in 0..m {
        write!(csv, ",x{j}").expect("string write");
    }
    csv.push('\n');
    let mut row = |kind: &str, sheet: usize, u: &[f64], x: &[f64]| {
        write!(csv, "{kind},{sheet}").expect("string write");
        for v in u.iter().chain(x) {
            write!(csv, ",{v:.6}").expect("string write");
        }
        csv.push('\n');
    };
    for id in 0..slice.node_count() {
        let p = slice.node_param(id);
        let x = slice.point(&p);
        row("point", p.sheet, &p.coords, x.as_slice());
    }
    for c in chords {
        row("chord", c.start_param.sheet, &c.start_param.coords, c.start_point.as_slice());
    }
    PlotOutput {
        svg: None,
        csv,
        cusps: Vec::new(),
        warning: Some(format!(
            "UnsupportedProjection: no planar picture for a {k}-dimensional slice in {model}; wrote data only"
        )),
    }
}
