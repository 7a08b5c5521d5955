//! Mesh-file ingestion.
//!
//! Delimited text with a header row and one row per mesh node. An optional
//! leading `sheet` column selects the sheet (default 0); the next
//! `param_dim` columns are parameter coordinates and the remaining columns
//! are ambient coordinates. Parameter values must form a complete uniform
//! grid. For a periodic factor the last grid value is one step short of the
//! period (the seam node is not repeated).
//!
//! Between nodes the immersion is the tensor-product Catmull-Rom
//! interpolant of the node images, which is C^1 and reproduces the nodes.

use std::io::Read;
use std::sync::Arc;

use super::{Factor, ParamSlice};
use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Node data read from a mesh file, in slice node order.
#[derive(Debug, Clone)]
pub struct MeshGrid {
    pub factors: Vec<Factor>,
    pub sheets: usize,
    pub values: Vec<Vector>,
}

pub fn read_mesh_csv<R: Read>(
    reader: R,
    name: &str,
    periodic: &[bool],
    param_dim: usize,
) -> Result<ParamSlice> {
    let grid = parse_grid(reader, periodic, param_dim)?;
    grid.into_slice(name)
}

fn parse_grid<R: Read>(reader: R, periodic: &[bool], param_dim: usize) -> Result<MeshGrid> {
    if periodic.len() != param_dim {
        return Err(Error::Mesh(format!(
            "{} periodicity flags for parameter dimension {param_dim}",
            periodic.len()
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Mesh(e.to_string()))?.clone();
    let has_sheet = header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("sheet"));
    let offset = usize::from(has_sheet);
    if header.len() < offset + param_dim + 1 {
        return Err(Error::Mesh(format!(
            "header has {} columns, need at least {}",
            header.len(),
            offset + param_dim + 1
        )));
    }
    let ambient = header.len() - offset - param_dim;

    let mut rows: Vec<(usize, Vec<f64>, Vector)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Mesh(e.to_string()))?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Mesh(format!("row {}: {e}", line + 2)))?;
        if nums.len() != header.len() || nums.iter().any(|x| !x.is_finite()) {
            return Err(Error::Mesh(format!("row {}: malformed", line + 2)));
        }
        let sheet = if has_sheet {
            let s = nums[0];
            if s < 0.0 || s.fract() != 0.0 {
                return Err(Error::Mesh(format!("row {}: bad sheet index", line + 2)));
            }
            s as usize
        } else {
            0
        };
        rows.push((
            sheet,
            nums[offset..offset + param_dim].to_vec(),
            Vector::from_vec(nums[offset + param_dim..].to_vec()),
        ));
    }
    if rows.is_empty() {
        return Err(Error::Mesh("no rows".into()));
    }

    let mut factors = Vec::with_capacity(param_dim);
    for (j, &per) in periodic.iter().enumerate() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r.1[j]).collect();
        vals.sort_by(f64::total_cmp);
        let span = (vals[vals.len() - 1] - vals[0]).abs().max(1.0);
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * span);
        let n = vals.len();
        if n < if per { 3 } else { 2 } {
            return Err(Error::Mesh(format!("factor {j} has only {n} distinct values")));
        }
        let h = (vals[n - 1] - vals[0]) / (n - 1) as f64;
        if vals.iter().enumerate().any(|(i, v)| (v - (vals[0] + h * i as f64)).abs() > 1e-6 * h) {
            return Err(Error::Mesh(format!("factor {j} is not uniformly spaced")));
        }
        let hi = if per { vals[0] + h * n as f64 } else { vals[n - 1] };
        factors.push(Factor {
            lo: vals[0],
            hi,
            periodic: per,
            nodes: n,
        });
    }

    let sheets = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
    let per_sheet: usize = factors.iter().map(|f| f.nodes).product();
    let mut values: Vec<Option<Vector>> = vec![None; sheets * per_sheet];
    for (sheet, u, x) in rows {
        if x.len() != ambient {
            return Err(Error::Mesh("ragged ambient columns".into()));
        }
        let mut id = 0;
        for (j, f) in factors.iter().enumerate().rev() {
            let i = ((u[j] - f.lo) / f.spacing()).round() as usize;
            id = id * f.nodes + i;
        }
        let slot = &mut values[sheet * per_sheet + id];
        if slot.is_some() {
            return Err(Error::Mesh(format!("duplicate node at {u:?} on sheet {sheet}")));
        }
        *slot = Some(x);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(id, v)| v.ok_or_else(|| Error::Mesh(format!("missing node {id}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeshGrid {
        factors,
        sheets,
        values,
    })
}

impl MeshGrid {
    pub fn into_slice(self, name: &str) -> Result<ParamSlice> {
        let factors = self.factors.clone();
        let sheets = self.sheets;
        let grid = Arc::new(self);
        let immersion = Arc::new(move |sheet: usize, u: &Vector| grid.interpolate(sheet, u));
        ParamSlice::new(name, factors, sheets, immersion, None)
    }

    fn interpolate(&self, sheet: usize, u: &Vector) -> Vector {
        let k = self.factors.len();
        let per_sheet: usize = self.factors.iter().map(|f| f.nodes).product();
        // per factor: four (index, weight) pairs
        let stencils: Vec<[(usize, f64); 4]> = self
            .factors
            .iter()
            .zip(u.iter())
            .map(|(f, &x)| {
                let t = (f.wrap(x) - f.lo) / f.spacing();
                let base = t.floor();
                let s = t - base;
                let w = catmull_rom_weights(s);
                let mut st = [(0usize, 0.0); 4];
                for (m, item) in st.iter_mut().enumerate() {
                    let i = base as i64 - 1 + m as i64;
                    let idx = if f.periodic {
                        i.rem_euclid(f.nodes as i64)
                    } else {
                        i.clamp(0, f.nodes as i64 - 1)
                    };
                    *item = (idx as usize, w[m]);
                }
                st
            })
            .collect();
        let dim = self.values[0].len();
        let mut out = Vector::zeros(dim);
        for combo in 0..4usize.pow(k as u32) {
            let mut c = combo;
            let mut id = 0;
            let mut weight = 1.0;
            let mut strides = 1;
            for (j, f) in self.factors.iter().enumerate() {
                let (idx, w) = stencils[j][c % 4];
                c /= 4;
                id += idx * strides;
                strides *= f.nodes;
                weight *= w;
            }
            if weight != 0.0 {
                out += &self.values[sheet * per_sheet + id] * weight;
            }
        }
        out
    }
}

fn catmull_rom_weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle_csv(n: usize) -> String {
        let mut s = String::from("t,x,y,z\n");
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            s.push_str(&format!("{t},{},{},0\n", t.cos(), t.sin()));
        }
        s
    }

    #[test]
    fn reads_a_periodic_curve() {
        let slice = read_mesh_csv(circle_csv(128).as_bytes(), "c", &[true], 1).unwrap();
        let f = slice.factors()[0];
        assert_eq!(f.nodes, 128);
        assert!((f.hi - TAU).abs() < 1e-12);
        // nodes are reproduced exactly, off-node points to interpolation accuracy
        let x = slice.point_at(0, &Vector::from_vec(vec![TAU * 3.0 / 128.0]));
        assert!((x[0] - (TAU * 3.0 / 128.0).cos()).abs() < 1e-14);
        let y = slice.point_at(0, &Vector::from_vec(vec![1.0]));
        assert!((y[0] - 1.0f64.cos()).abs() < 1e-5 && (y[1] - 1.0f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn sheet_column_creates_sheets() {
        let mut s = String::from("sheet,t,x,y,z\n");
        for sheet in 0..2 {
            for i in 0..8 {
                let t = i as f64 / 7.0;
                s.push_str(&format!("{sheet},{t},{t},{},{}\n", sheet as f64 * 5.0, 0.0));
            }
        }
        let slice = read_mesh_csv(s.as_bytes(), "two", &[false], 1).unwrap();
        assert_eq!(slice.sheets(), 2);
        assert_eq!(slice.component_count(), 2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_mesh_csv("t,x\n".as_bytes(), "e", &[true], 1).is_err());
        assert!(read_mesh_csv("t,x,y,z\n0,1,0,0\n1,1,0,abc\n".as_bytes(), "e", &[false], 1).is_err());
        assert!(read_mesh_csv("t,x,y,z\n0,1,0,0\n1,1,0,0\n3,1,0,0\n".as_bytes(), "e", &[false], 1).is_err());
        assert!(read_mesh_csv(circle_csv(8).as_bytes(), "e", &[true, false], 1).is_err());
    }
}
