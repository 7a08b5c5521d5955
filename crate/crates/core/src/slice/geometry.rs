//! Slice criterion checks (closed pullback, transversality to the Reeb
//! line field), periods of `i*alpha`, and its primitive on exact slices.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{MeshEdge, ParamPoint, ParamSlice};
use crate::contact::ContactModel;
use crate::error::{Error, Result};
use crate::numerics::{line_quadrature, Matrix, Vector};

pub const DEFAULT_TOL_CLOSED: f64 = 1e-6;
pub const DEFAULT_TOL_TRANSVERSE: f64 = 1e-4;
/// Periods below this are reported as exactly zero.
pub const PERIOD_ZERO: f64 = 1e-8;
const EDGE_PANELS: usize = 4;
const CYCLE_SAMPLES: usize = 100;
const CYCLE_SEED: u64 = 0x5eed;

/// Components `(i*alpha)(d/du_k) = alpha(i(u), d i / d u_k)`.
pub fn pullback_alpha(model: &ContactModel, slice: &ParamSlice, p: &ParamPoint) -> Result<Vector> {
    pullback_at(model, slice, p.sheet, &p.vector())
}

pub(crate) fn pullback_at(
    model: &ContactModel,
    slice: &ParamSlice,
    sheet: usize,
    u: &Vector,
) -> Result<Vector> {
    let x = model.normalize(&slice.point_at(sheet, u))?;
    let jac = slice.jacobian_at(sheet, u)?;
    let alpha = model.alpha_covector(&x);
    Ok(jac.transpose() * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedCheck {
    pub pass: bool,
    pub max_residual: f64,
}

/// Max over mesh nodes and index pairs of `|d_j b_k - d_k b_j|` where
/// `b = i*alpha`, by central differences. Curves pass with residual 0.
pub fn check_closed(model: &ContactModel, slice: &ParamSlice, tol: f64) -> Result<ClosedCheck> {
    let k = slice.param_dim();
    if k < 2 {
        return Ok(ClosedCheck {
            pass: true,
            max_residual: 0.0,
        });
    }
    let base_step = if slice.has_analytic_jacobian() { 1e-4 } else { 5e-4 };
    let residuals: Vec<Result<f64>> = (0..slice.node_count())
        .into_par_iter()
        .map(|id| {
            let p = slice.node_param(id);
            let u = p.vector();
            // d_j b, one column per direction
            let mut grads = Matrix::zeros(k, k);
            for j in 0..k {
                let h = base_step * (1.0 + u[j].abs());
                let mut up = u.clone();
                up[j] += h;
                let mut um = u.clone();
                um[j] -= h;
                let d = (pullback_at(model, slice, p.sheet, &up)? - pullback_at(model, slice, p.sheet, &um)?)
                    / (up[j] - um[j]);
                grads.set_column(j, &d);
            }
            let mut worst: f64 = 0.0;
            for j in 0..k {
                for l in j + 1..k {
                    worst = worst.max((grads[(l, j)] - grads[(j, l)]).abs());
                }
            }
            Ok(worst)
        })
        .collect();
    let mut max_residual: f64 = 0.0;
    for r in residuals {
        max_residual = max_residual.max(r?);
    }
    Ok(ClosedCheck {
        pass: max_residual <= tol,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseCheck {
    pub pass: bool,
    pub min_sigma: f64,
}

/// Smallest singular value of `[di | R]` over mesh nodes. Since `ker d alpha`
/// is spanned by the Reeb field, `min_sigma > 0` says both that `di` has
/// full rank and that `R` is not tangent to the slice.
pub fn check_transverse(model: &ContactModel, slice: &ParamSlice, tol: f64) -> Result<TransverseCheck> {
    let sigmas: Vec<Result<f64>> = (0..slice.node_count())
        .into_par_iter()
        .map(|id| {
            let p = slice.node_param(id);
            let x = slice.point(&p);
            let reeb = model.reeb_at(&x)?;
            let jac = slice.jacobian(&p)?;
            let mut m = Matrix::zeros(x.len(), jac.ncols() + 1);
            m.columns_mut(0, jac.ncols()).copy_from(&jac);
            m.set_column(jac.ncols(), &reeb);
            Ok(m.singular_values().min())
        })
        .collect();
    let mut min_sigma = f64::INFINITY;
    for s in sigmas {
        min_sigma = min_sigma.min(s?);
    }
    Ok(TransverseCheck {
        pass: min_sigma > tol,
        min_sigma,
    })
}

/// Largest distance from the model manifold over mesh node images.
pub fn max_manifold_defect(model: &ContactModel, slice: &ParamSlice) -> f64 {
    (0..slice.node_count())
        .map(|id| model.defect(&slice.point(&slice.node_param(id))))
        .fold(0.0, f64::max)
}

/// Integral of `i*alpha` around one generator loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Period {
    pub component: usize,
    pub sheet: usize,
    pub factor: usize,
    pub value: f64,
}

/// One period per periodic factor per sheet, integrating along the grid
/// line through the sheet's first node.
pub fn periods(model: &ContactModel, slice: &ParamSlice, closed: &ClosedCheck) -> Result<Vec<Period>> {
    if !closed.pass {
        return Err(Error::NotClosed {
            residual: closed.max_residual,
        });
    }
    let mut out = Vec::new();
    for sheet in 0..slice.sheets() {
        let base = slice.node_param(slice.node_id(sheet, &vec![0; slice.param_dim()]));
        for (j, f) in slice.factors().iter().enumerate() {
            let Some(period) = f.period() else { continue };
            let a = base.vector();
            let mut b = a.clone();
            b[j] += period;
            let value = line_quadrature(
                |u, d| {
                    pullback_at(model, slice, sheet, u)
                        .map(|beta| beta.dot(d))
                        .unwrap_or(f64::NAN)
                },
                &a,
                &b,
                f.nodes,
            )?;
            out.push(Period {
                component: slice.component_of_sheet[sheet],
                sheet,
                factor: j,
                value: if value.abs() < PERIOD_ZERO { 0.0 } else { value },
            });
        }
    }
    Ok(out)
}

/// A primitive `f` of `i*alpha` on the mesh, anchored to 0 at the first
/// node of each component.
#[derive(Debug, Clone)]
pub struct PrimitiveField {
    values: Vec<f64>,
    anchors: Vec<usize>,
    /// Largest closing defect `|f(a) + int_a^b i*alpha - f(b)|` over the
    /// sampled off-tree edges.
    pub path_residual: f64,
    pub checked_cycles: usize,
}

impl PrimitiveField {
    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// True when `self` was built on `slice` and has an anchor on `component`.
    pub fn covers(&self, slice: &ParamSlice, component: usize) -> bool {
        self.values.len() == slice.node_count()
            && self.anchors.iter().any(|&a| slice.component_of_node(a) == component)
    }

    /// Adds `shift[c]` on every node of component `c`.
    pub fn shifted(&self, slice: &ParamSlice, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (id, v) in out.values.iter_mut().enumerate() {
            *v += shift[slice.component_of_node(id)];
        }
        out
    }

    /// `f(p)`: value at the nearest node plus the integral of `i*alpha`
    /// from that node to `p`.
    pub fn value_at(&self, model: &ContactModel, slice: &ParamSlice, p: &ParamPoint) -> Result<f64> {
        let node = slice.nearest_node(p);
        let a = slice.node_param(node).vector();
        let b = slice.unwrap_near(p, a.as_slice());
        let tail = if (&b - &a).amax() == 0.0 {
            0.0
        } else {
            line_quadrature(
                |u, d| {
                    pullback_at(model, slice, p.sheet, u)
                        .map(|beta| beta.dot(d))
                        .unwrap_or(f64::NAN)
                },
                &a,
                &b,
                EDGE_PANELS,
            )?
        };
        Ok(self.values[node] + tail)
    }
}

fn edge_integral(model: &ContactModel, slice: &ParamSlice, e: &MeshEdge) -> Result<f64> {
    let Some(j) = e.factor else {
        // sewing edges join coincident points
        return Ok(0.0);
    };
    let p = slice.node_param(e.from);
    let a = p.vector();
    let mut b = a.clone();
    b[j] += slice.factors()[j].spacing();
    line_quadrature(
        |u, d| {
            pullback_at(model, slice, p.sheet, u)
                .map(|beta| beta.dot(d))
                .unwrap_or(f64::NAN)
        },
        &a,
        &b,
        EDGE_PANELS,
    )
}

/// Integrates `i*alpha` along a breadth-first spanning tree of the mesh
/// graph. Requires every period to vanish.
pub fn primitive(model: &ContactModel, slice: &ParamSlice, periods: &[Period]) -> Result<PrimitiveField> {
    if let Some(p) = periods.iter().find(|p| p.value != 0.0) {
        return Err(Error::NonExact {
            component: p.component,
            factor: p.factor,
            period: p.value,
        });
    }
    let edges = slice.edges();
    let integrals: Vec<Result<f64>> = edges
        .par_iter()
        .map(|e| edge_integral(model, slice, e))
        .collect();
    let integrals: Vec<f64> = integrals.into_iter().collect::<Result<_>>()?;

    let n = slice.node_count();
    // adjacency: (neighbour, edge index, sign)
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        adj[e.from].push((e.to, k, 1.0));
        adj[e.to].push((e.from, k, -1.0));
    }

    let mut values = vec![f64::NAN; n];
    let mut anchors = vec![usize::MAX; slice.component_count()];
    let mut tree_edge = vec![false; edges.len()];
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !values[start].is_nan() {
            continue;
        }
        anchors[slice.component_of_node(start)] = start;
        values[start] = 0.0;
        queue.push_back(start);
        while let Some(a) = queue.pop_front() {
            for &(b, k, sign) in &adj[a] {
                if values[b].is_nan() {
                    values[b] = values[a] + sign * integrals[k];
                    tree_edge[k] = true;
                    queue.push_back(b);
                }
            }
        }
    }

    let off_tree: Vec<usize> = (0..edges.len()).filter(|&k| !tree_edge[k]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(CYCLE_SEED);
    let picks: Vec<usize> = if off_tree.len() <= CYCLE_SAMPLES {
        off_tree.clone()
    } else {
        let mut s: Vec<usize> = sample(&mut rng, off_tree.len(), CYCLE_SAMPLES)
            .into_iter()
            .map(|i| off_tree[i])
            .collect();
        s.sort_unstable();
        s
    };
    let path_residual = picks
        .iter()
        .map(|&k| {
            let e = &edges[k];
            (values[e.from] + integrals[k] - values[e.to]).abs()
        })
        .fold(0.0, f64::max);

    Ok(PrimitiveField {
        values,
        anchors,
        path_residual,
        checked_cycles: picks.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::Factor;
    use std::f64::consts::{PI, TAU};
    use std::sync::Arc;

    fn r3() -> ContactModel {
        ContactModel::StandardR { n: 2 }
    }

    fn circle() -> ParamSlice {
        ParamSlice::new(
            "circle",
            vec![Factor::circle(0.0, TAU)],
            1,
            Arc::new(|_, u| Vector::from_vec(vec![u[0].cos(), u[0].sin(), 0.0])),
            None,
        )
        .unwrap()
    }

    fn sheared_unknot(c: f64) -> ParamSlice {
        ParamSlice::new(
            "sheared",
            vec![Factor::circle(0.0, TAU)],
            1,
            Arc::new(move |_, u| {
                let t = u[0];
                Vector::from_vec(vec![
                    t.cos(),
                    -(2.0 * t).sin(),
                    2.0 / 3.0 * t.sin().powi(3) + c * t.sin(),
                ])
            }),
            None,
        )
        .unwrap()
    }

    #[test]
    fn circle_pullback_is_sin_squared() {
        let s = circle();
        for t in [0.0, 0.4, 2.0, 5.5] {
            let b = pullback_alpha(&r3(), &s, &ParamPoint::new(0, vec![t])).unwrap();
            assert!((b[0] - t.sin().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn curves_pass_closedness_vacuously() {
        let c = check_closed(&r3(), &circle(), 1e-6).unwrap();
        assert!(c.pass);
        assert_eq!(c.max_residual, 0.0);
    }

    #[test]
    fn circle_transverse_with_unit_sigma() {
        let t = check_transverse(&r3(), &circle(), 1e-4).unwrap();
        assert!(t.pass);
        assert!((t.min_sigma - 1.0).abs() < 1e-9);
    }

    #[test]
    fn circle_period_and_non_exactness() {
        let model = r3();
        let s = circle();
        let closed = check_closed(&model, &s, 1e-6).unwrap();
        let ps = periods(&model, &s, &closed).unwrap();
        assert_eq!(ps.len(), 1);
        assert!((ps[0].value - PI).abs() < 1e-8);
        match primitive(&model, &s, &ps) {
            Err(Error::NonExact { period, .. }) => assert!((period - PI).abs() < 1e-8),
            other => panic!("expected NonExact, got {other:?}"),
        }
    }

    #[test]
    fn periods_refuse_non_closed_input() {
        let bad = ClosedCheck {
            pass: false,
            max_residual: 0.5,
        };
        assert!(matches!(
            periods(&r3(), &circle(), &bad),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn sheared_unknot_primitive_is_the_shear() {
        let model = r3();
        let c = -0.5;
        let s = sheared_unknot(c);
        let closed = check_closed(&model, &s, 1e-6).unwrap();
        let ps = periods(&model, &s, &closed).unwrap();
        assert_eq!(ps[0].value, 0.0);
        let f = primitive(&model, &s, &ps).unwrap();
        assert!(f.path_residual < 1e-6);
        for id in (0..s.node_count()).step_by(17) {
            let t = s.node_param(id).coords[0];
            assert!((f.node_values()[id] - c * t.sin()).abs() < 1e-6);
        }
        let at = |t: f64| f.value_at(&model, &s, &ParamPoint::new(0, vec![t])).unwrap();
        assert!((at(PI / 2.0) - at(1.5 * PI) + 1.0).abs() < 1e-6);
        // off-node evaluation
        assert!((at(1.234) - c * 1.234f64.sin()).abs() < 1e-8);
    }
}
