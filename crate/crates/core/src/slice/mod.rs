//! Parametrized slices `i: Lambda -> Y` on regular parameter grids.
//!
//! A slice is a finite union of *sheets*, each a copy of the same
//! parameter box (a product of intervals and circles). Sheets that share
//! an image point at some mesh node are sewn together; connected components
//! of the slice are computed from the resulting mesh graph.

mod geometry;
mod mesh_file;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{jacobian_fd, Matrix, Vector, DEFAULT_FD_STEP};
use crate::spatial::SpatialHash;

pub use geometry::{
    check_closed, check_transverse, max_manifold_defect, periods, primitive, pullback_alpha,
    ClosedCheck, Period, PrimitiveField, TransverseCheck, DEFAULT_TOL_CLOSED,
    DEFAULT_TOL_TRANSVERSE,
};
pub use mesh_file::{read_mesh_csv, MeshGrid};

/// Default node count along a circle factor.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Default node count along an interval factor.
pub const DEFAULT_INTERVAL_NODES: usize = 129;
/// Nodes on different sheets closer than this are identified.
pub const SEWING_TOL: f64 = 1e-9;

pub type ImmersionFn = Arc<dyn Fn(usize, &Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(usize, &Vector) -> Matrix + Send + Sync>;

/// One factor of the parameter box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
    pub nodes: usize,
}

impl Factor {
    pub fn circle(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            periodic: true,
            nodes: DEFAULT_CIRCLE_NODES,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            periodic: false,
            nodes: DEFAULT_INTERVAL_NODES,
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.nodes as f64
        } else {
            (self.hi - self.lo) / (self.nodes - 1) as f64
        }
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.hi - self.lo)
    }

    fn coord(&self, i: usize) -> f64 {
        self.lo + self.spacing() * i as f64
    }

    fn wrap(&self, x: f64) -> f64 {
        if !self.periodic {
            return x;
        }
        let period = self.hi - self.lo;
        let mut w = self.lo + (x - self.lo).rem_euclid(period);
        if w >= self.hi - 1e-12 * period {
            w = self.lo;
        }
        w
    }

    fn delta(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        match self.period() {
            Some(p) => d - p * (d / p).round(),
            None => d,
        }
    }

    fn nearest_index(&self, x: f64) -> usize {
        let t = ((self.wrap(x) - self.lo) / self.spacing()).round() as i64;
        if self.periodic {
            t.rem_euclid(self.nodes as i64) as usize
        } else {
            t.clamp(0, self.nodes as i64 - 1) as usize
        }
    }
}

/// A point of the parameter domain: sheet index plus box coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub sheet: usize,
    pub coords: Vec<f64>,
}

impl ParamPoint {
    pub fn new(sheet: usize, coords: Vec<f64>) -> Self {
        Self { sheet, coords }
    }

    pub fn vector(&self) -> Vector {
        Vector::from_vec(self.coords.clone())
    }
}

/// Grid edge between two mesh nodes. `factor` is `None` for sewing edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshEdge {
    pub from: usize,
    pub to: usize,
    pub factor: Option<usize>,
}

#[derive(Clone)]
pub struct ParamSlice {
    name: String,
    factors: Vec<Factor>,
    sheets: usize,
    immersion: ImmersionFn,
    jacobian: Option<JacobianFn>,
    component_of_sheet: Vec<usize>,
    sewing: Vec<(usize, usize)>,
    components: usize,
}

impl fmt::Debug for ParamSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSlice")
            .field("name", &self.name)
            .field("factors", &self.factors)
            .field("sheets", &self.sheets)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("components", &self.components)
            .finish()
    }
}

impl ParamSlice {
    pub fn new(
        name: impl Into<String>,
        factors: Vec<Factor>,
        sheets: usize,
        immersion: ImmersionFn,
        jacobian: Option<JacobianFn>,
    ) -> Result<Self> {
        if sheets == 0 {
            return Err(Error::Mesh("a slice needs at least one sheet".into()));
        }
        for f in &factors {
            let min_nodes = if f.periodic { 3 } else { 2 };
            if !(f.hi > f.lo) || f.nodes < min_nodes {
                return Err(Error::Mesh(format!("degenerate factor {f:?}")));
            }
        }
        let mut slice = Self {
            name: name.into(),
            factors,
            sheets,
            immersion,
            jacobian,
            component_of_sheet: Vec::new(),
            sewing: Vec::new(),
            components: 0,
        };
        slice.compute_components();
        Ok(slice)
    }

    /// Same slice on a different grid.
    pub fn with_resolution(&self, nodes: &[usize]) -> Result<Self> {
        assert_eq!(nodes.len(), self.factors.len());
        let factors = self
            .factors
            .iter()
            .zip(nodes)
            .map(|(f, &n)| Factor { nodes: n, ..*f })
            .collect();
        Self::new(
            self.name.clone(),
            factors,
            self.sheets,
            self.immersion.clone(),
            self.jacobian.clone(),
        )
    }

    /// Same slice with every factor's node count multiplied by `k`.
    pub fn refined(&self, k: usize) -> Result<Self> {
        let nodes: Vec<usize> = self
            .factors
            .iter()
            .map(|f| if f.periodic { f.nodes * k } else { (f.nodes - 1) * k + 1 })
            .collect();
        self.with_resolution(&nodes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn param_dim(&self) -> usize {
        self.factors.len()
    }

    pub fn sheets(&self) -> usize {
        self.sheets
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, p: &ParamPoint) -> usize {
        self.component_of_sheet[p.sheet]
    }

    pub fn component_of_node(&self, id: usize) -> usize {
        self.component_of_sheet[id / self.nodes_per_sheet()]
    }

    pub fn nodes_per_sheet(&self) -> usize {
        self.factors.iter().map(|f| f.nodes).product()
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_sheet() * self.sheets
    }

    /// Largest parameter spacing over the factors.
    pub fn param_spacing(&self) -> f64 {
        self.factors.iter().map(Factor::spacing).fold(0.0, f64::max)
    }

    pub fn node_indices(&self, id: usize) -> (usize, Vec<usize>) {
        let per = self.nodes_per_sheet();
        let (sheet, mut rest) = (id / per, id % per);
        let mut idx = vec![0; self.factors.len()];
        for (j, f) in self.factors.iter().enumerate() {
            idx[j] = rest % f.nodes;
            rest /= f.nodes;
        }
        (sheet, idx)
    }

    pub fn node_id(&self, sheet: usize, idx: &[usize]) -> usize {
        let mut id = 0;
        for (j, f) in self.factors.iter().enumerate().rev() {
            id = id * f.nodes + idx[j];
        }
        sheet * self.nodes_per_sheet() + id
    }

    pub fn node_param(&self, id: usize) -> ParamPoint {
        let (sheet, idx) = self.node_indices(id);
        let coords = self.factors.iter().zip(&idx).map(|(f, &i)| f.coord(i)).collect();
        ParamPoint { sheet, coords }
    }

    /// Mesh node nearest to `p` on the same sheet.
    pub fn nearest_node(&self, p: &ParamPoint) -> usize {
        let idx: Vec<usize> = self
            .factors
            .iter()
            .zip(&p.coords)
            .map(|(f, &x)| f.nearest_index(x))
            .collect();
        self.node_id(p.sheet, &idx)
    }

    /// Reduces periodic coordinates into `[lo, hi)`.
    pub fn wrap(&self, p: &ParamPoint) -> ParamPoint {
        ParamPoint {
            sheet: p.sheet,
            coords: self.factors.iter().zip(&p.coords).map(|(f, &x)| f.wrap(x)).collect(),
        }
    }

    pub fn in_domain(&self, p: &ParamPoint) -> bool {
        p.sheet < self.sheets
            && p.coords.len() == self.factors.len()
            && self.factors.iter().zip(&p.coords).all(|(f, &x)| {
                x.is_finite() && (f.periodic || (x >= f.lo - 1e-12 && x <= f.hi + 1e-12))
            })
    }

    /// Coordinates of `p` shifted by whole periods to lie closest to `near`.
    pub fn unwrap_near(&self, p: &ParamPoint, near: &[f64]) -> Vector {
        Vector::from_iterator(
            p.coords.len(),
            self.factors
                .iter()
                .zip(p.coords.iter().zip(near))
                .map(|(f, (&x, &n))| n + f.delta(n, x)),
        )
    }

    /// Parameter distance with periodic identification; infinite across sheets.
    pub fn param_distance(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        if a.sheet != b.sheet {
            return f64::INFINITY;
        }
        self.factors
            .iter()
            .zip(a.coords.iter().zip(&b.coords))
            .map(|(f, (&x, &y))| f.delta(x, y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn point(&self, p: &ParamPoint) -> Vector {
        (self.immersion)(p.sheet, &p.vector())
    }

    pub fn point_at(&self, sheet: usize, u: &Vector) -> Vector {
        (self.immersion)(sheet, u)
    }

    /// Jacobian of the immersion, analytic when available.
    pub fn jacobian(&self, p: &ParamPoint) -> Result<Matrix> {
        self.jacobian_at(p.sheet, &p.vector())
    }

    pub fn jacobian_at(&self, sheet: usize, u: &Vector) -> Result<Matrix> {
        match &self.jacobian {
            Some(j) => Ok(j(sheet, u)),
            None => jacobian_fd(|v| (self.immersion)(sheet, v), u, DEFAULT_FD_STEP),
        }
    }

    pub fn node_points(&self) -> Vec<Vector> {
        (0..self.node_count())
            .map(|id| self.point(&self.node_param(id)))
            .collect()
    }

    /// Forward grid edges plus sewing edges.
    pub fn edges(&self) -> Vec<MeshEdge> {
        let mut out = Vec::new();
        for id in 0..self.node_count() {
            let (sheet, idx) = self.node_indices(id);
            for (j, f) in self.factors.iter().enumerate() {
                let next = idx[j] + 1;
                let to_idx = if next < f.nodes {
                    next
                } else if f.periodic {
                    0
                } else {
                    continue;
                };
                let mut nidx = idx.clone();
                nidx[j] = to_idx;
                out.push(MeshEdge {
                    from: id,
                    to: self.node_id(sheet, &nidx),
                    factor: Some(j),
                });
            }
        }
        out.extend(self.sewing.iter().map(|&(a, b)| MeshEdge {
            from: a,
            to: b,
            factor: None,
        }));
        out
    }

    /// Count of node pairs farther apart than `exclusion` in parameter
    /// space whose images lie within `threshold`. Zero means the slice is
    /// embedded at mesh scale. Sewn pairs across sheets are not counted.
    pub fn embedding_violations(&self, exclusion: f64, threshold: f64) -> usize {
        let points = self.node_points();
        let hash = SpatialHash::new(points.clone(), threshold.max(1e-12) * 4.0);
        let mut count = 0;
        for (i, p) in points.iter().enumerate() {
            let pi = self.node_param(i);
            for j in hash.within(p, threshold) {
                if j <= i {
                    continue;
                }
                let pj = self.node_param(j);
                if pi.sheet == pj.sheet && self.param_distance(&pi, &pj) > exclusion {
                    count += 1;
                }
            }
        }
        count
    }

    fn compute_components(&mut self) {
        let mut parent: Vec<usize> = (0..self.sheets).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = x;
            while parent[c] != r {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        self.sewing.clear();
        if self.sheets > 1 {
            let points = self.node_points();
            let hash = SpatialHash::new(points.clone(), 1e-6);
            let per = self.nodes_per_sheet();
            for (i, p) in points.iter().enumerate() {
                for j in hash.within(p, SEWING_TOL) {
                    if j > i && j / per != i / per {
                        self.sewing.push((i, j));
                        let (a, b) = (find(&mut parent, i / per), find(&mut parent, j / per));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
        let mut label = vec![usize::MAX; self.sheets];
        let mut next = 0;
        let mut comp = vec![0; self.sheets];
        for s in 0..self.sheets {
            let r = find(&mut parent, s);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            comp[s] = label[r];
        }
        self.component_of_sheet = comp;
        self.components = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle_slice(sheets: usize, offset: f64) -> ParamSlice {
        ParamSlice::new(
            "circles",
            vec![Factor::circle(0.0, TAU)],
            sheets,
            Arc::new(move |s, u| {
                Vector::from_vec(vec![u[0].cos() + offset * s as f64, u[0].sin(), 0.0])
            }),
            None,
        )
        .unwrap()
    }

    #[test]
    fn node_indexing_round_trips() {
        let s = ParamSlice::new(
            "box",
            vec![
                Factor { nodes: 5, ..Factor::circle(0.0, 1.0) },
                Factor { nodes: 4, ..Factor::interval(0.0, 1.0) },
            ],
            2,
            Arc::new(|s, u| Vector::from_vec(vec![u[0], u[1], s as f64])),
            None,
        )
        .unwrap();
        assert_eq!(s.node_count(), 40);
        for id in 0..s.node_count() {
            let (sheet, idx) = s.node_indices(id);
            assert_eq!(s.node_id(sheet, &idx), id);
            assert_eq!(s.nearest_node(&s.node_param(id)), id);
        }
        // 5*3 interval edges + 5*4 circle edges per sheet
        assert_eq!(s.edges().len(), 2 * (4 * 5 + 3 * 5));
    }

    #[test]
    fn components_follow_sewing() {
        assert_eq!(circle_slice(2, 3.0).component_count(), 2);
        // offset 0: the two sheets coincide and get sewn into one component
        let sewn = circle_slice(2, 0.0);
        assert_eq!(sewn.component_count(), 1);
        assert_eq!(sewn.component_of_node(300), 0);
    }

    #[test]
    fn periodic_distance_and_wrap() {
        let s = circle_slice(1, 0.0);
        let a = ParamPoint::new(0, vec![0.05]);
        let b = ParamPoint::new(0, vec![TAU - 0.05]);
        assert!((s.param_distance(&a, &b) - 0.1).abs() < 1e-12);
        let w = s.wrap(&ParamPoint::new(0, vec![TAU + 0.2]));
        assert!((w.coords[0] - 0.2).abs() < 1e-12);
        assert!((s.unwrap_near(&b, &[0.0])[0] + 0.05).abs() < 1e-12);
    }

    #[test]
    fn circle_is_embedded() {
        let s = circle_slice(1, 0.0);
        assert_eq!(s.embedding_violations(5.0 * s.param_spacing(), 1e-9), 0);
    }
}
