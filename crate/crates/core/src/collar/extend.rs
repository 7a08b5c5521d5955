//! Extension of `h = -f` from a `StandardR` slice to the ambient space.
//!
//! Write points as `(q, z)` with `q` the Lagrangian projection. Over each
//! column `q` the slice contributes *knots* `(z_b, w_b)`: for every branch
//! of the slice passing within the tube radius of `q`, `z_b` is the height
//! at the foot point `u_b` of the branch and `w_b = -f(u_b)`. A knot is
//! *fixed* when the foot point projects exactly to `q`, i.e. the point lies
//! on the slice. The fiber function `phi_q` interpolates the knots with
//! slope bounded below by `-(1 - margin)`, decays to zero beyond the lowest
//! and highest knots, and `h(q, z) = B(q) phi_q(z)` for a planar bump `B`
//! equal to one on the projection of the slice.
//!
//! `dh(R) = dh/dz = B phi_q'` is then `> -(1 - margin)` everywhere, and
//! `h = -f` on the slice. A fiber with two fixed knots is a double point of
//! the projection; the consecutive pair is feasible iff the corresponding
//! chord passes [`feasibility_oracle_1d`](super::feasibility_oracle_1d).
//! The construction is continuous in `z` but only piecewise smooth in `q`
//! where a branch enters the tube.

use std::sync::Arc;

use crate::chords::ChordRecord;
use crate::contact::{smoothstep, ContactModel};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::slice::{ParamPoint, ParamSlice, PrimitiveField};
use crate::spatial::SpatialHash;

use super::{feasibility_oracle_1d, DeformationSpec, DEFAULT_MARGIN};

/// Foot points closer than this to the column are treated as on the slice.
const FIXED_TOL: f64 = 1e-10;
/// Knots closer than this in height are merged.
const KNOT_MERGE: f64 = 1e-9;
/// Constraint slack, relative to chord length, when solving for component shifts.
const SHIFT_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendOptions {
    pub margin: f64,
    /// Minimum height over which `phi` decays to zero outside the knots.
    pub runway: f64,
    /// Tube radius as a multiple of the projected mesh spacing.
    pub tube_factor: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            runway: 1.0,
            tube_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Extension {
    Built(Box<ExtendedH>),
    /// Chords whose endpoint values admit no interpolant with the required
    /// slope bound. Mixed chords appear here only when no choice of
    /// per-component constants satisfies all of them at once.
    Obstructed { chords: Vec<ChordRecord> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Knot {
    z: f64,
    w: f64,
    fixed: bool,
}

/// The fiber function over one column.
#[derive(Debug, Clone)]
struct FiberProfile {
    bump: f64,
    knots: Vec<Knot>,
    runway: f64,
    slope: f64,
}

/// `h` on the ambient space, built from a primitive of `i*alpha`.
#[derive(Debug, Clone)]
pub struct ExtendedH {
    model: ContactModel,
    slice: ParamSlice,
    f: PrimitiveField,
    shifts: Vec<f64>,
    hash: SpatialHash,
    neighbours: Vec<Vec<usize>>,
    spacing: f64,
    tube: f64,
    opts: ExtendOptions,
}

/// Builds `h`, or reports the chords that make this scheme infeasible.
/// `chords` must be the complete chord list of the slice.
pub fn extend_h(
    model: &ContactModel,
    slice: &ParamSlice,
    f: &PrimitiveField,
    chords: &[ChordRecord],
    opts: &ExtendOptions,
) -> Result<Extension> {
    if !model.is_standard_r() {
        return Err(Error::WrongModel(model.name()));
    }
    assert!(opts.margin > 0.0 && opts.margin < 1.0, "margin must lie in (0, 1)");
    let slope = 1.0 - opts.margin;

    // f(start) and f(end) before any shift
    let ends: Vec<(f64, f64)> = chords
        .iter()
        .map(|c| Ok((f.value_at(model, slice, &c.start_param)?, f.value_at(model, slice, &c.end_param)?)))
        .collect::<Result<_>>()?;

    let obstructed: Vec<ChordRecord> = chords
        .iter()
        .zip(&ends)
        .filter(|(c, (fs, fe))| c.pure && !feasibility_oracle_1d(c.length, -fs, -fe, opts.margin))
        .map(|(c, _)| c.clone())
        .collect();
    if !obstructed.is_empty() {
        return Ok(Extension::Obstructed { chords: obstructed });
    }

    // h = -f + s_c on component c; a mixed chord from A to B needs
    // s_B - s_A > f(end) - f(start) - slope * length.
    let n = slice.component_count();
    let constraints: Vec<(usize, usize, f64, usize)> = chords
        .iter()
        .zip(&ends)
        .enumerate()
        .filter(|(_, (c, _))| !c.pure)
        .map(|(i, (c, (fs, fe)))| {
            let bound = fe - fs - slope * c.length + SHIFT_SLACK * c.length;
            (c.start_component, c.end_component, bound, i)
        })
        .collect();
    let mut shifts = vec![0.0; n];
    for _ in 0..n {
        for &(a, b, w, _) in &constraints {
            if shifts[a] + w > shifts[b] {
                shifts[b] = shifts[a] + w;
            }
        }
    }
    let violated: Vec<ChordRecord> = constraints
        .iter()
        .filter(|&&(a, b, w, _)| shifts[a] + w > shifts[b] + 1e-12)
        .map(|&(_, _, _, i)| chords[i].clone())
        .collect();
    if !violated.is_empty() {
        return Ok(Extension::Obstructed { chords: violated });
    }

    let neg: Vec<f64> = shifts.iter().map(|s| -s).collect();
    let f_eff = f.shifted(slice, &neg);
    let proj_dim = model.ambient_dim() - 1;
    let projected: Vec<Vector> = slice
        .node_points()
        .iter()
        .map(|x| x.rows(0, proj_dim).into_owned())
        .collect();
    let edges = slice.edges();
    let spacing = edges
        .iter()
        .filter(|e| e.factor.is_some())
        .map(|e| (&projected[e.from] - &projected[e.to]).norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut neighbours = vec![Vec::new(); slice.node_count()];
    for e in &edges {
        neighbours[e.from].push(e.to);
        neighbours[e.to].push(e.from);
    }
    let tube = opts.tube_factor * spacing;
    Ok(Extension::Built(Box::new(ExtendedH {
        model: *model,
        slice: slice.clone(),
        f: f_eff,
        shifts,
        hash: SpatialHash::new(projected, tube + spacing),
        neighbours,
        spacing,
        tube,
        opts: *opts,
    })))
}

impl ExtendedH {
    pub fn eval(&self, p: &Vector) -> f64 {
        let proj_dim = self.model.ambient_dim() - 1;
        let q = p.rows(0, proj_dim).into_owned();
        self.profile(&q).value(p[proj_dim])
    }

    /// Constant added to `-f` on each component.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn tube_radius(&self) -> f64 {
        self.tube
    }

    pub fn options(&self) -> &ExtendOptions {
        &self.opts
    }

    /// The primitive `h` restricts to, up to sign: `f` minus the shifts.
    pub fn primitive(&self) -> &PrimitiveField {
        &self.f
    }

    pub fn into_spec(self) -> DeformationSpec {
        let margin = self.opts.margin;
        let h = Arc::new(self);
        DeformationSpec::new(Arc::new(move |p| h.eval(p)), margin)
    }

    /// `max |h + f|` over a uniform parameter sample with
    /// `samples_per_factor` points per factor on every sheet, offset from
    /// the mesh nodes.
    pub fn max_h_plus_f(&self, samples_per_factor: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in param_samples(&self.slice, samples_per_factor, 0.37) {
            let x = self.slice.point(&p);
            let h = self.eval(&x);
            let f = self.f.value_at(&self.model, &self.slice, &p)?;
            worst = worst.max((h + f).abs());
        }
        Ok(worst)
    }

    /// Points at which the deformation is verified: columns over the slice,
    /// columns offset inside the tube, and chord double points, each at
    /// `resolution` uniform heights covering the support of `h`, plus the
    /// slice heights themselves.
    pub fn verification_grid(&self, chords: &[ChordRecord], resolution: usize) -> Vec<Vector> {
        let resolution = resolution.max(4);
        let proj_dim = self.model.ambient_dim() - 1;
        let k = self.slice.param_dim().max(1);
        let per_factor = (resolution / k).max(6);

        let mut columns: Vec<(Vector, Option<f64>)> = Vec::new();
        for p in param_samples(&self.slice, per_factor, 0.5) {
            let x = self.slice.point(&p);
            let q = x.rows(0, proj_dim).into_owned();
            for axis in 0..proj_dim {
                for s in [-0.5, 0.5] {
                    let mut o = q.clone();
                    o[axis] += s * self.tube;
                    columns.push((o, None));
                }
            }
            columns.push((q, Some(x[proj_dim])));
        }
        for c in chords {
            columns.push((c.start_point.rows(0, proj_dim).into_owned(), Some(c.start_point[proj_dim])));
        }

        let heights: Vec<f64> = self.slice.node_points().iter().map(|x| x[proj_dim]).collect();
        let (zlo, zhi) = heights
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| (a.min(z), b.max(z)));
        let wmax = self.f.node_values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let reach = self.opts.runway.max(2.0 * wmax / (1.0 - self.opts.margin)) + 0.1;
        let (zlo, zhi) = (zlo - reach, zhi + reach);

        let mut out = Vec::new();
        for (q, on) in columns {
            let mut push = |z: f64| {
                let mut p = Vector::zeros(proj_dim + 1);
                p.rows_mut(0, proj_dim).copy_from(&q);
                p[proj_dim] = z;
                out.push(p);
            };
            for i in 0..resolution {
                push(zlo + (zhi - zlo) * (i as f64 + 0.5) / resolution as f64);
            }
            if let Some(z) = on {
                for dz in [-1e-3, 0.0, 1e-3] {
                    push(z + dz);
                }
            }
        }
        out
    }

    fn profile(&self, q: &Vector) -> FiberProfile {
        let slope = 1.0 - self.opts.margin;
        let empty = FiberProfile {
            bump: 0.0,
            knots: Vec::new(),
            runway: self.opts.runway,
            slope,
        };
        let candidates = self.hash.within(q, self.tube + self.spacing);
        if candidates.is_empty() {
            return empty;
        }

        // branches: connected pieces of the candidate set in the mesh graph
        let index_of = |id: usize| candidates.binary_search(&id).ok();
        let mut parent: Vec<usize> = (0..candidates.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (a, &id) in candidates.iter().enumerate() {
            for &nb in &self.neighbours[id] {
                if let Some(b) = index_of(nb) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let points = self.hash.points();
        let mut seeds: Vec<(usize, f64)> = Vec::new(); // per root: nearest node
        let mut root_slot: Vec<Option<usize>> = vec![None; candidates.len()];
        for (a, &id) in candidates.iter().enumerate() {
            let r = find(&mut parent, a);
            let d = (&points[id] - q).norm();
            match root_slot[r] {
                Some(s) if seeds[s].1 <= d => {}
                Some(s) => seeds[s] = (id, d),
                None => {
                    root_slot[r] = Some(seeds.len());
                    seeds.push((id, d));
                }
            }
        }

        let proj_dim = q.len();
        let mut feet: Vec<(ParamPoint, f64)> = Vec::new();
        for (id, _) in seeds {
            let (foot, dist) = self.foot_point(id, q, proj_dim);
            if dist > self.tube {
                continue;
            }
            let duplicate = feet
                .iter()
                .any(|(p, _)| self.slice.param_distance(p, &foot) < KNOT_MERGE);
            if !duplicate {
                feet.push((foot, dist));
            }
        }
        if feet.is_empty() {
            return empty;
        }
        let dmin = feet.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        let bump = 1.0 - smoothstep(dmin / self.tube);

        let mut knots: Vec<Knot> = feet
            .iter()
            .map(|(p, d)| Knot {
                z: self.slice.point(p)[proj_dim],
                w: -self.f.value_at(&self.model, &self.slice, p).unwrap_or(0.0),
                fixed: *d < FIXED_TOL,
            })
            .collect();
        knots.sort_by(|a, b| a.z.total_cmp(&b.z));
        let mut merged: Vec<Knot> = Vec::with_capacity(knots.len());
        for k in knots {
            match merged.last_mut() {
                Some(last) if k.z - last.z < KNOT_MERGE => {
                    if k.fixed && !last.fixed {
                        *last = k;
                    }
                }
                _ => merged.push(k),
            }
        }
        repair(&mut merged, slope);
        FiberProfile {
            bump,
            knots: merged,
            runway: self.opts.runway,
            slope,
        }
    }

    /// Gauss-Newton for the parameter whose projection is closest to `q`,
    /// started at node `id`.
    fn foot_point(&self, id: usize, q: &Vector, proj_dim: usize) -> (ParamPoint, f64) {
        let start = self.slice.node_param(id);
        let sheet = start.sheet;
        let mut u = start.vector();
        let factors = self.slice.factors();
        for _ in 0..30 {
            let r = self.slice.point_at(sheet, &u).rows(0, proj_dim) - q;
            let Ok(j) = self.slice.jacobian_at(sheet, &u) else { break };
            let jp: Matrix = j.rows(0, proj_dim).into_owned();
            let Ok(pinv) = jp.pseudo_inverse(1e-12) else { break };
            let step = pinv * r;
            u -= &step;
            for (x, f) in u.iter_mut().zip(factors) {
                if !f.periodic {
                    *x = x.clamp(f.lo, f.hi);
                }
            }
            if step.amax() < 1e-15 * (1.0 + u.amax()) {
                break;
            }
        }
        let foot = self.slice.wrap(&ParamPoint::new(sheet, u.iter().copied().collect()));
        let dist = (self.slice.point(&foot).rows(0, proj_dim) - q).norm();
        (foot, dist)
    }
}

/// Parameter points on a uniform grid, shifted by `offset` grid steps.
pub(super) fn param_samples(slice: &ParamSlice, per_factor: usize, offset: f64) -> Vec<ParamPoint> {
    let factors = slice.factors();
    let counts: Vec<usize> = factors.iter().map(|_| per_factor.max(2)).collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total * slice.sheets());
    for sheet in 0..slice.sheets() {
        for mut idx in 0..total {
            let coords = factors
                .iter()
                .zip(&counts)
                .map(|(f, &n)| {
                    let i = idx % n;
                    idx /= n;
                    f.lo + (f.hi - f.lo) * (i as f64 + offset) / n as f64
                })
                .collect();
            out.push(ParamPoint::new(sheet, coords));
        }
    }
    out
}

fn feasible(a: &Knot, b: &Knot, slope: f64) -> bool {
    b.w - a.w > -slope * (b.z - a.z)
}

/// Moves free knot values until every consecutive pair is feasible. Free
/// knots between fixed ones are interpolated linearly; outside them each
/// knot is pulled to within half the allowed drop of its neighbour.
fn repair(knots: &mut [Knot], slope: f64) {
    if knots.windows(2).all(|w| feasible(&w[0], &w[1], slope)) {
        return;
    }
    let fixed: Vec<usize> = (0..knots.len()).filter(|&i| knots[i].fixed).collect();
    let (first, last) = match (fixed.first(), fixed.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0, 0),
    };
    for pair in fixed.windows(2) {
        let (a, b) = (knots[pair[0]], knots[pair[1]]);
        for k in &mut knots[pair[0] + 1..pair[1]] {
            k.w = a.w + (b.w - a.w) * (k.z - a.z) / (b.z - a.z);
        }
    }
    for i in (0..first).rev() {
        let cap = knots[i + 1].w + 0.5 * slope * (knots[i + 1].z - knots[i].z);
        knots[i].w = knots[i].w.min(cap);
    }
    for i in last + 1..knots.len() {
        let floor = knots[i - 1].w - 0.5 * slope * (knots[i].z - knots[i - 1].z);
        knots[i].w = knots[i].w.max(floor);
    }
}

impl FiberProfile {
    fn value(&self, z: f64) -> f64 {
        if self.bump == 0.0 || self.knots.is_empty() {
            return 0.0;
        }
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        let phi = if z <= first.z {
            let len = self.runway.max(2.0 * (-first.w).max(0.0) / self.slope);
            piece(first.z - len, 0.0, first.z, first.w, z, self.slope)
        } else if z >= last.z {
            let len = self.runway.max(2.0 * last.w.max(0.0) / self.slope);
            piece(last.z, last.w, last.z + len, 0.0, z, self.slope)
        } else {
            let i = self.knots.partition_point(|k| k.z <= z);
            let (a, b) = (self.knots[i - 1], self.knots[i]);
            piece(a.z, a.w, b.z, b.w, z, self.slope)
        };
        self.bump * phi
    }
}

/// Monotone C^1 transition from `(za, wa)` to `(zb, wb)` with zero slope at
/// both ends. When descending, its steepest slope stays strictly above
/// `-slope` provided the mean slope does.
fn piece(za: f64, wa: f64, zb: f64, wb: f64, z: f64, slope: f64) -> f64 {
    let dz = zb - za;
    let dw = wb - wa;
    let delta = if dw < 0.0 {
        let ratio = slope * dz / -dw;
        (0.5 * (1.0 - 1.0 / ratio)).clamp(1e-3, 0.25)
    } else {
        0.25
    };
    wa + dw * plateau_step((z - za) / dz, delta)
}

/// A step from 0 to 1 on `[0, 1]` whose derivative ramps up smoothly on
/// `[0, delta]`, is constant `1 / (1 - delta)` in the middle, and ramps
/// down on `[1 - delta, 1]`.
pub(crate) fn plateau_step(s: f64, delta: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let c = 1.0 / (1.0 - delta);
    // antiderivative of the quintic smoothstep on [0, 1]
    let ramp = |x: f64| x.powi(4) * (x * (x - 3.0) + 2.5);
    if s < delta {
        c * delta * ramp(s / delta)
    } else if s <= 1.0 - delta {
        c * (0.5 * delta + s - delta)
    } else {
        1.0 - c * delta * ramp((1.0 - s) / delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derivative_fd;

    #[test]
    fn plateau_step_is_c1_with_bounded_slope() {
        for delta in [0.01, 0.1, 0.25] {
            let c = 1.0 / (1.0 - delta);
            let mut prev = 0.0;
            for i in 0..=2000 {
                let s = i as f64 / 2000.0;
                let v = plateau_step(s, delta);
                assert!(v >= prev - 1e-15);
                prev = v;
                let d = derivative_fd(|x| plateau_step(x, delta), s, 1e-7);
                assert!(d <= c + 1e-6, "delta {delta} s {s} slope {d}");
            }
            for s in [delta, 1.0 - delta] {
                let l = plateau_step(s - 1e-9, delta);
                let r = plateau_step(s + 1e-9, delta);
                assert!((l - r).abs() < 1e-8);
            }
            assert_eq!(plateau_step(1.0, delta), 1.0);
        }
    }

    #[test]
    fn descending_piece_respects_slope() {
        let slope = 0.95;
        // mean slope -0.9, allowed -0.95
        for i in 0..=1000 {
            let z = i as f64 / 1000.0;
            let d = derivative_fd(|x| piece(0.0, 0.0, 1.0, -0.9, x, slope), z, 1e-7);
            assert!(d > -slope, "z {z} slope {d}");
        }
    }

    #[test]
    fn repair_fixes_free_knots() {
        let slope = 0.95;
        let mut ks = vec![
            Knot { z: 0.0, w: 0.0, fixed: true },
            Knot { z: 0.5, w: -5.0, fixed: false },
            Knot { z: 1.0, w: 0.2, fixed: true },
            Knot { z: 1.1, w: -3.0, fixed: false },
        ];
        repair(&mut ks, slope);
        assert!(ks.windows(2).all(|w| feasible(&w[0], &w[1], slope)));
        assert_eq!(ks[0].w, 0.0);
        assert_eq!(ks[2].w, 0.2);
        assert!((ks[1].w - 0.1).abs() < 1e-15);

        let mut free = vec![
            Knot { z: 0.0, w: 3.0, fixed: false },
            Knot { z: 1.0, w: 0.0, fixed: false },
        ];
        repair(&mut free, slope);
        assert!(feasible(&free[0], &free[1], slope));
    }
}
