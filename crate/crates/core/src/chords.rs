//! Reeb chords of a slice: Reeb trajectories that start and end on it.
//!
//! Two finders are provided. In `StandardR` the Reeb flow is translation
//! in `z`, so chords are exactly the double points of the Lagrangian
//! projection; [`chords_projection`] seeds Newton from nearby mesh pairs.
//! [`chords_shooting`] works in any model by integrating the Reeb flow from
//! mesh nodes and refining near-returns with Newton on
//! `flow_T(i(u)) - i(v) = 0`.
//!
//! Orientation: `start` is always the flow source, i.e. the end point is
//! reached from the start point in positive time `length`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::ContactModel;
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_flow, integrate_flow_dense, jacobian_fd, newton_solve, newton_solve_with, FlowOptions,
    Matrix, NewtonOptions, Vector,
};
use crate::slice::{ParamPoint, ParamSlice};
use crate::spatial::SpatialHash;

/// Below this reciprocal condition number at the root, a chord is flagged
/// as part of a non-isolated family.
const ISOLATION_RCOND: f64 = 1e-8;
/// Refined chords must close to this ambient residual.
const LANDING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChordSearch {
    /// Projection distance for seeding pairs; default 3x the projected mesh spacing.
    pub seed_radius: Option<f64>,
    /// Minimum parameter separation of seed pairs; default 5x the parameter spacing.
    pub exclusion_radius: Option<f64>,
    /// Longest Reeb flow time explored by shooting.
    pub max_time: f64,
    /// Chords shorter than this are discarded as diagonal solutions.
    pub min_length: f64,
    /// Capture distance for shooting; default 2x the ambient mesh spacing.
    pub capture_radius: Option<f64>,
    pub cluster_radius: f64,
    /// Cap on the number of mesh nodes used as shooting sources.
    pub max_shoot_seeds: usize,
    pub flow_tol: f64,
}

impl Default for ChordSearch {
    fn default() -> Self {
        Self {
            seed_radius: None,
            exclusion_radius: None,
            max_time: 3.0,
            min_length: 1e-4,
            capture_radius: None,
            cluster_radius: 1e-6,
            max_shoot_seeds: 2048,
            flow_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChordRecord {
    pub start_param: ParamPoint,
    pub end_param: ParamPoint,
    pub start_point: Vector,
    pub end_point: Vector,
    /// Reeb flow time from start to end.
    pub length: f64,
    pub pure: bool,
    pub start_component: usize,
    pub end_component: usize,
    pub action: Option<f64>,
    /// Final Newton residual.
    pub residual: f64,
    /// False when the chord sits in a continuous family (degenerate root).
    pub isolated: bool,
}

impl ChordRecord {
    fn new(
        slice: &ParamSlice,
        start: ParamPoint,
        end: ParamPoint,
        length: f64,
        residual: f64,
        isolated: bool,
    ) -> Self {
        let start = canonical(slice, &start);
        let end = canonical(slice, &end);
        let (sc, ec) = (slice.component_of(&start), slice.component_of(&end));
        Self {
            start_point: slice.point(&start),
            end_point: slice.point(&end),
            start_param: start,
            end_param: end,
            length,
            pure: sc == ec,
            start_component: sc,
            end_component: ec,
            action: None,
            residual,
            isolated,
        }
    }
}

fn canonical(slice: &ParamSlice, p: &ParamPoint) -> ParamPoint {
    let mut w = slice.wrap(p);
    for (x, f) in w.coords.iter_mut().zip(slice.factors()) {
        if f.periodic && (f.hi - *x) < 1e-9 {
            *x = f.lo;
        }
        if *x == 0.0 {
            *x = 0.0; // normalise -0.0
        }
    }
    w
}

fn max_edge_length<F: Fn(&Vector) -> Vector>(slice: &ParamSlice, points: &[Vector], map: F) -> f64 {
    slice
        .edges()
        .iter()
        .filter(|e| e.factor.is_some())
        .map(|e| (map(&points[e.from]) - map(&points[e.to])).norm())
        .fold(0.0, f64::max)
}

/// Double points of the Lagrangian projection of a `StandardR` slice.
pub fn chords_projection(model: &ContactModel, slice: &ParamSlice, opts: &ChordSearch) -> Result<Vec<ChordRecord>> {
    if !model.is_standard_r() {
        return Err(Error::WrongModel(model.name()));
    }
    let k = slice.param_dim();
    let proj_dim = model.ambient_dim() - 1;
    if 2 * k != proj_dim {
        return Err(Error::Dimension(format!(
            "projection search needs a {}-dimensional slice in {}, got {k}",
            proj_dim / 2,
            model
        )));
    }
    let project = |x: &Vector| x.rows(0, proj_dim).into_owned();
    let points = slice.node_points();
    let projected: Vec<Vector> = points.iter().map(project).collect();
    let spacing = max_edge_length(slice, &points, project);
    let seed_radius = opts.seed_radius.unwrap_or(3.0 * spacing);
    let exclusion = opts.exclusion_radius.unwrap_or(5.0 * slice.param_spacing());
    let hash = SpatialHash::new(projected.clone(), seed_radius.max(1e-12));

    let mut seeds: Vec<(usize, usize)> = Vec::new();
    for (i, q) in projected.iter().enumerate() {
        let pi = slice.node_param(i);
        for j in hash.within(q, seed_radius) {
            if j > i && slice.param_distance(&pi, &slice.node_param(j)) > exclusion {
                seeds.push((i, j));
            }
        }
    }

    let newton = NewtonOptions {
        residual_tol: 1e-12,
        max_iterations: 40,
        ..NewtonOptions::default()
    };
    let outcomes: Vec<Result<Option<ChordRecord>>> = seeds
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (slice.node_param(i), slice.node_param(j));
            let (sa, sb) = (a.sheet, b.sheet);
            let system = |w: &Vector| {
                let u = w.rows(0, k).into_owned();
                let v = w.rows(k, k).into_owned();
                project(&slice.point_at(sa, &u)) - project(&slice.point_at(sb, &v))
            };
            let jacobian = |w: &Vector| -> Result<Matrix> {
                let u = w.rows(0, k).into_owned();
                let v = w.rows(k, k).into_owned();
                let ju = slice.jacobian_at(sa, &u)?;
                let jv = slice.jacobian_at(sb, &v)?;
                let mut m = Matrix::zeros(proj_dim, 2 * k);
                m.view_mut((0, 0), (proj_dim, k)).copy_from(&ju.rows(0, proj_dim));
                m.view_mut((0, k), (proj_dim, k)).copy_from(&(-jv.rows(0, proj_dim)));
                Ok(m)
            };
            let mut seed = Vector::zeros(2 * k);
            seed.rows_mut(0, k).copy_from(&a.vector());
            seed.rows_mut(k, k).copy_from(&b.vector());
            let rep = newton_solve_with(system, jacobian, &seed, &newton)?;
            let pu = ParamPoint::new(sa, rep.root.rows(0, k).iter().copied().collect());
            let pv = ParamPoint::new(sb, rep.root.rows(k, k).iter().copied().collect());
            if !slice.in_domain(&pu) || !slice.in_domain(&pv) || rep.residual > LANDING_TOL {
                return Ok(None);
            }
            let (za, zb) = (model.height(&slice.point(&pu))?, model.height(&slice.point(&pv))?);
            let length = (zb - za).abs();
            if length <= opts.min_length {
                return Ok(None);
            }
            let rc = rcond(&jacobian(&rep.root)?);
            let (start, end) = if za < zb { (pu, pv) } else { (pv, pu) };
            Ok(Some(ChordRecord::new(
                slice,
                start,
                end,
                length,
                rep.residual,
                rc > ISOLATION_RCOND,
            )))
        })
        .collect();
    collect_outcomes(outcomes, opts.cluster_radius)
}

fn collect_outcomes(outcomes: Vec<Result<Option<ChordRecord>>>, cluster_radius: f64) -> Result<Vec<ChordRecord>> {
    let total = outcomes.len();
    let mut failed = 0;
    let mut raw = Vec::new();
    for o in outcomes {
        match o {
            Ok(Some(c)) => raw.push(c),
            Ok(None) => {}
            Err(Error::StepUnderflow { t }) => return Err(Error::StepUnderflow { t }),
            Err(_) => failed += 1,
        }
    }
    if 2 * failed > total {
        return Err(Error::NewtonFailuresExceeded { failed, total });
    }
    Ok(dedup_chords(raw, cluster_radius))
}

fn rcond(m: &Matrix) -> f64 {
    let s = m.singular_values();
    let max = s.max();
    if max > 0.0 {
        s.min() / max
    } else {
        0.0
    }
}

/// Reeb flow for signed time, by the adaptive integrator.
fn flow(model: &ContactModel, x: &Vector, t: f64, tol: f64) -> Result<Vector> {
    if t >= 0.0 {
        integrate_flow(|p| model.reeb_field(p), x, t, tol)
    } else {
        integrate_flow(|p| -model.reeb_field(p), x, -t, tol)
    }
}

/// Chords found by integrating the Reeb flow from mesh nodes.
pub fn chords_shooting(model: &ContactModel, slice: &ParamSlice, opts: &ChordSearch) -> Result<Vec<ChordRecord>> {
    assert!(opts.max_time > 0.0, "max_time must be positive");
    let k = slice.param_dim();
    let dim = model.contact_dim();
    if 2 * k + 1 != dim {
        return Err(Error::Dimension(format!(
            "shooting needs a {}-dimensional slice in {model}, got {k}",
            (dim - 1) / 2
        )));
    }
    let points = slice.node_points();
    let spacing = max_edge_length(slice, &points, |x| x.clone());
    let capture = opts.capture_radius.unwrap_or(2.0 * spacing);
    let hash = SpatialHash::new(points.clone(), capture.max(1e-12));
    let stride = slice.node_count().div_ceil(opts.max_shoot_seeds.max(1));
    let sources: Vec<usize> = (0..slice.node_count()).step_by(stride).collect();

    // scan: (source node, time, target node)
    let scans: Vec<Result<Vec<(usize, f64, usize)>>> = sources
        .par_iter()
        .map(|&src| {
            let x0 = &points[src];
            let speed = model.reeb_field(x0).norm().max(1e-12);
            let fo = FlowOptions {
                tol: 1e-10,
                max_step: Some(0.5 * capture / speed),
                ..FlowOptions::default()
            };
            let traj = integrate_flow_dense(|p| model.reeb_field(p), x0, opts.max_time, &fo)?;
            let mut found = Vec::new();
            let mut in_initial = true;
            let mut best: Option<(f64, f64, usize)> = None;
            for s in traj.samples() {
                match hash.nearest_within(&s.y, capture) {
                    Some((node, d)) => {
                        if in_initial {
                            continue;
                        }
                        if best.is_none_or(|b| d < b.0) {
                            best = Some((d, s.t, node));
                        }
                    }
                    None => {
                        in_initial = false;
                        if let Some((_, t, node)) = best.take() {
                            found.push((src, t, node));
                        }
                    }
                }
            }
            if let Some((_, t, node)) = best {
                found.push((src, t, node));
            }
            Ok(found)
        })
        .collect();
    let mut candidates = Vec::new();
    for s in scans {
        candidates.extend(s?);
    }

    let newton = NewtonOptions {
        residual_tol: 1e-11,
        max_iterations: 30,
        min_norm_step: true,
        ..NewtonOptions::default()
    };
    let outcomes: Vec<Result<Option<ChordRecord>>> = candidates
        .par_iter()
        .map(|&(src, t0, dst)| {
            let (a, b) = (slice.node_param(src), slice.node_param(dst));
            let (sa, sb) = (a.sheet, b.sheet);
            let frame = model.tangent_frame(&points[dst]);
            let full = |w: &Vector| -> Result<Vector> {
                let u = w.rows(0, k).into_owned();
                let v = w.rows(k + 1, k).into_owned();
                Ok(flow(model, &slice.point_at(sa, &u), w[k], opts.flow_tol)? - slice.point_at(sb, &v))
            };
            let system = |w: &Vector| match full(w) {
                Ok(d) => frame.transpose() * d,
                Err(_) => Vector::from_element(dim, f64::NAN),
            };
            let mut seed = Vector::zeros(dim);
            seed.rows_mut(0, k).copy_from(&a.vector());
            seed[k] = t0;
            seed.rows_mut(k + 1, k).copy_from(&b.vector());
            let rep = newton_solve(system, &seed, &newton)?;
            let time = rep.root[k];
            let pu = ParamPoint::new(sa, rep.root.rows(0, k).iter().copied().collect());
            let pv = ParamPoint::new(sb, rep.root.rows(k + 1, k).iter().copied().collect());
            if !slice.in_domain(&pu) || !slice.in_domain(&pv) || time <= opts.min_length {
                return Ok(None);
            }
            let landing = full(&rep.root)?.norm();
            if landing > LANDING_TOL {
                return Ok(None);
            }
            let rc = rcond(&jacobian_fd(system, &rep.root, 1e-6)?);
            Ok(Some(ChordRecord::new(slice, pu, pv, time, landing, rc > ISOLATION_RCOND)))
        })
        .collect();
    collect_outcomes(outcomes, opts.cluster_radius)
}

fn coord_distance(a: &ParamPoint, b: &ParamPoint) -> f64 {
    if a.sheet != b.sheet {
        return f64::INFINITY;
    }
    a.coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Merges chords whose start parameters, end parameters and lengths all
/// agree within `cluster_radius`, keeping the smallest residual, then sorts
/// canonically by (length, start parameter, end parameter).
pub fn dedup_chords(mut raw: Vec<ChordRecord>, cluster_radius: f64) -> Vec<ChordRecord> {
    raw.sort_by(|a, b| a.residual.total_cmp(&b.residual).then_with(|| canonical_order(a, b)));
    let mut kept: Vec<ChordRecord> = Vec::new();
    for c in raw {
        let duplicate = kept.iter().any(|k| {
            coord_distance(&k.start_param, &c.start_param) <= cluster_radius
                && coord_distance(&k.end_param, &c.end_param) <= cluster_radius
                && (k.length - c.length).abs() <= cluster_radius
        });
        if !duplicate {
            kept.push(c);
        }
    }
    kept.sort_by(canonical_order);
    kept
}

fn param_order(a: &ParamPoint, b: &ParamPoint) -> Ordering {
    a.sheet.cmp(&b.sheet).then_with(|| {
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

pub fn canonical_order(a: &ChordRecord, b: &ChordRecord) -> Ordering {
    a.length
        .total_cmp(&b.length)
        .then_with(|| param_order(&a.start_param, &b.start_param))
        .then_with(|| param_order(&a.end_param, &b.end_param))
}

/// Distance between the Reeb flow image of the start point and the end point.
pub fn landing_error(model: &ContactModel, chord: &ChordRecord, tol: f64) -> Result<f64> {
    Ok((flow(model, &chord.start_point, chord.length, tol)? - &chord.end_point).norm())
}
