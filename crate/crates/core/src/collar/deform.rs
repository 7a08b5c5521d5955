//! Pointwise checks of a deformation `lambda + d(rho h)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chords::ChordRecord;
use crate::contact::{ContactModel, SymplectizationModel};
use crate::error::{Error, Result};
use crate::numerics::{integrate_flow, integrate_flow_dense, FlowOptions, Vector};

use super::DeformationSpec;

/// Largest endpoint drift accepted by the reparametrization check.
const DRIFT_TOL: f64 = 1e-5;
/// The rescaled field carries finite-difference noise near 1e-10, so the
/// integrator tolerance stays above it.
const FLOW_TOL: f64 = 1e-9;
const CHORD_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformationCheck {
    pub points: usize,
    /// Minimum of `dh(R)` over the grid.
    pub min_dh_reeb: f64,
    /// Minimum of `dt(V_lambda + X_H)` at `t = 1`.
    pub min_dt_component: f64,
    /// Largest `|dt(V_lambda + X_H) - (1 + dh(R))|` at `t = 1`.
    pub max_disagreement: f64,
    pub margin: f64,
    /// `dh(R) > -1 + margin` at every grid point.
    pub pass_dh_reeb: bool,
    /// `dt(V_lambda + X_H) > margin` at every grid point.
    pub pass_dt_component: bool,
    /// Both bounds hold.
    pub pass: bool,
    /// The two bounds reach the same verdict.
    pub agree: bool,
}

/// Evaluates `dh(R)` and the `dt`-component of the deformed Liouville field
/// at `t = 1` on every grid point.
pub fn check_deformation(
    sym: &SymplectizationModel,
    spec: &DeformationSpec,
    grid: &[Vector],
) -> Result<DeformationCheck> {
    let rows: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|p| {
            let dh_r = spec.dh_reeb(&sym.base, p);
            let field = sym.liouville_deformed(spec, 1.0, p)?;
            Ok((dh_r, field[0]))
        })
        .collect();
    let mut min_dh = f64::INFINITY;
    let mut min_dt = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for r in rows {
        let (dh_r, dt) = r?;
        if !dh_r.is_finite() || !dt.is_finite() {
            return Err(Error::NonFinite {
                context: "deformation check",
            });
        }
        min_dh = min_dh.min(dh_r);
        min_dt = min_dt.min(dt);
        worst = worst.max((dt - 1.0 - dh_r).abs());
    }
    let pass_dh_reeb = min_dh > -1.0 + spec.margin;
    let pass_dt_component = min_dt > spec.margin;
    Ok(DeformationCheck {
        points: grid.len(),
        min_dh_reeb: min_dh,
        min_dt_component: min_dt,
        max_disagreement: worst,
        margin: spec.margin,
        pass_dh_reeb,
        pass_dt_component,
        pass: pass_dh_reeb && pass_dt_component,
        agree: pass_dh_reeb == pass_dt_component,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparamChord {
    /// Time for the rescaled field `R / (1 + dh(R))` to reach the end point.
    pub time: f64,
    /// `length + h(end) - h(start)`, the time predicted by integrating
    /// `1 + dh(R)` along the chord.
    pub predicted_time: f64,
    /// Distance from the rescaled flow image to the end point.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparamCheck {
    pub chords: Vec<ReparamChord>,
    pub max_drift: f64,
    pub pass: bool,
}

/// Flows each chord's start point along `R / (1 + dh(R))` and measures how
/// closely the trajectory returns to the chord's end point. The rescaled
/// field is parallel to `R`, so it traces the same chord.
pub fn reeb_reparam_check(
    model: &ContactModel,
    spec: &DeformationSpec,
    chords: &[ChordRecord],
) -> Result<ReparamCheck> {
    let scale = |p: &Vector| 1.0 + spec.dh_reeb(model, p);
    let mut out = Vec::with_capacity(chords.len());
    for c in chords {
        let samples: Vec<f64> = (0..=CHORD_SAMPLES)
            .map(|i| scale(&model.exact_reeb_flow(&c.start_point, c.length * i as f64 / CHORD_SAMPLES as f64)))
            .collect();
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo <= 0.0 {
            return Err(Error::ReparamDegenerate { value: lo });
        }
        let field = |p: &Vector| {
            let g = scale(p);
            if g > 0.0 {
                model.reeb_field(p) / g
            } else {
                Vector::from_element(p.len(), f64::NAN)
            }
        };
        let horizon = 1.1 * c.length * hi + 1e-3;
        let opts = FlowOptions {
            tol: FLOW_TOL,
            max_step: Some(horizon / 256.0),
            ..FlowOptions::default()
        };
        let traj = integrate_flow_dense(field, &c.start_point, horizon, &opts)?;
        let dist = |t: f64| (traj.at(t) - &c.end_point).norm();
        let samples = traj.samples();
        let best = (0..samples.len())
            .min_by(|&a, &b| {
                (&samples[a].y - &c.end_point)
                    .norm()
                    .total_cmp(&(&samples[b].y - &c.end_point).norm())
            })
            .unwrap_or(0);
        let mut a = samples[best.saturating_sub(1)].t;
        let mut b = samples[(best + 1).min(samples.len() - 1)].t;
        // golden-section search on the dense output
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (dist(x1), dist(x2));
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = dist(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = dist(x2);
            }
        }
        let time = 0.5 * (a + b);
        let landed = integrate_flow(field, &c.start_point, time, FLOW_TOL)?;
        out.push(ReparamChord {
            time,
            predicted_time: c.length + spec.h(&c.end_point) - spec.h(&c.start_point),
            drift: (landed - &c.end_point).norm(),
        });
    }
    let max_drift = out.iter().map(|c| c.drift).fold(0.0, f64::max);
    Ok(ReparamCheck {
        chords: out,
        max_drift,
        pass: max_drift < DRIFT_TOL,
    })
}
