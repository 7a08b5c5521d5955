//! Dormand-Prince 5(4) integration of autonomous vector fields.

use super::{all_finite, Vector};
use crate::error::{Error, Result};

// Dormand-Prince tableau. The fields are autonomous, so the nodes c_i are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct FlowOptions {
    /// Per-step local error bound, mixed absolute/relative: `tol * (1 + |y_i|)`.
    pub tol: f64,
    /// Upper bound on the step size. Useful when the trajectory is sampled
    /// for proximity events.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step: time, state and field value.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub t: f64,
    pub y: Vector,
    pub dy: Vector,
}

/// Accepted steps of an integration with cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<FlowSample>,
}

impl Trajectory {
    pub fn samples(&self) -> &[FlowSample] {
        &self.samples
    }

    pub fn end(&self) -> &Vector {
        &self.samples.last().expect("trajectory is never empty").y
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    /// State at time `t`, clamped to the integrated interval.
    pub fn at(&self, t: f64) -> Vector {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0].y.clone();
        }
        if t >= self.duration() {
            return self.end().clone();
        }
        let i = s.partition_point(|p| p.t <= t) - 1;
        let (a, b) = (&s[i], &s[i + 1]);
        let h = b.t - a.t;
        let th = (t - a.t) / h;
        let th2 = th * th;
        let th3 = th2 * th;
        let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
        let h10 = th3 - 2.0 * th2 + th;
        let h01 = -2.0 * th3 + 3.0 * th2;
        let h11 = th3 - th2;
        &a.y * h00 + &a.dy * (h10 * h) + &b.y * h01 + &b.dy * (h11 * h)
    }
}

/// Endpoint of the flow of `field` after `duration`, with per-step local
/// error at most `tol`.
pub fn integrate_flow<F>(field: F, start: &Vector, duration: f64, tol: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> Vector,
{
    let traj = integrate_flow_dense(field, start, duration, &FlowOptions::with_tol(tol))?;
    Ok(traj.end().clone())
}

pub fn integrate_flow_dense<F>(
    field: F,
    start: &Vector,
    duration: f64,
    opts: &FlowOptions,
) -> Result<Trajectory>
where
    F: Fn(&Vector) -> Vector,
{
    assert!(duration >= 0.0, "flow duration must be non-negative");
    assert!(opts.tol > 0.0, "flow tolerance must be positive");

    let eval = |y: &Vector| -> Result<Vector> {
        let v = field(y);
        if all_finite(&v) {
            Ok(v)
        } else {
            Err(Error::NonFinite { context: "vector field" })
        }
    };

    let mut t = 0.0;
    let mut y = start.clone();
    let mut k1 = eval(&y)?;
    let mut samples = vec![FlowSample {
        t,
        y: y.clone(),
        dy: k1.clone(),
    }];
    if duration == 0.0 {
        return Ok(Trajectory { samples });
    }

    let h_cap = opts.max_step.unwrap_or(f64::INFINITY).min(duration);
    let speed = k1.amax();
    let mut h = if speed > 0.0 {
        (1e-2 * (1.0 + y.amax()) / speed).min(h_cap)
    } else {
        h_cap
    };

    let mut steps = 0;
    while t < duration {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        // absorb a rounding-sized remainder into the final step
        let last = t + h * (1.0 + 1e-6) >= duration;
        if last {
            h = duration - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        let k2 = eval(&(&y + &k1 * (h * A21)))?;
        let k3 = eval(&(&y + (&k1 * A31 + &k2 * A32) * h))?;
        let k4 = eval(&(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = eval(&(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 = eval(&(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h))?;
        let y_new = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = eval(&y_new)?;
        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;

        let err = err_vec
            .iter()
            .zip(y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| e.abs() / (opts.tol * (1.0 + a.abs().max(b.abs()))))
            .fold(0.0, f64::max);
        if !err.is_finite() {
            return Err(Error::NonFinite { context: "error estimate" });
        }

        if err <= 1.0 {
            t = if last { duration } else { t + h };
            y = y_new;
            k1 = k7;
            samples.push(FlowSample {
                t,
                y: y.clone(),
                dy: k1.clone(),
            });
        }
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        h = (h * factor).min(h_cap);
    }

    Ok(Trajectory { samples })
}

/// Classical fourth-order Runge-Kutta with `steps` equal steps. Fallback
/// scheme with a known, testable convergence order.
pub fn rk4_fixed<F>(field: F, start: &Vector, duration: f64, steps: usize) -> Result<Vector>
where
    F: Fn(&Vector) -> Vector,
{
    assert!(steps >= 1);
    let h = duration / steps as f64;
    let mut y = start.clone();
    for _ in 0..steps {
        let k1 = field(&y);
        let k2 = field(&(&y + &k1 * (0.5 * h)));
        let k3 = field(&(&y + &k2 * (0.5 * h)));
        let k4 = field(&(&y + &k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !all_finite(&y) {
            return Err(Error::NonFinite { context: "rk4 state" });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rotation(y: &Vector) -> Vector {
        Vector::from_vec(vec![-y[1], y[0]])
    }

    #[test]
    fn constant_field() {
        let end = integrate_flow(
            |_| Vector::from_vec(vec![0.0, 0.0, 1.0]),
            &Vector::zeros(3),
            2.0,
            1e-10,
        )
        .unwrap();
        assert!((end - Vector::from_vec(vec![0.0, 0.0, 2.0])).amax() < 1e-12);
    }

    #[test]
    fn half_turn_of_rotation() {
        let end = integrate_flow(rotation, &Vector::from_vec(vec![1.0, 0.0]), PI, 1e-10).unwrap();
        assert!((end[0] + 1.0).abs() < 1e-8 && end[1].abs() < 1e-8);
    }

    #[test]
    fn zero_duration_returns_start() {
        let p = Vector::from_vec(vec![0.3, -0.2]);
        assert_eq!(integrate_flow(rotation, &p, 0.0, 1e-8).unwrap(), p);
    }

    #[test]
    fn non_finite_field_is_reported() {
        let err = integrate_flow(|y| y.map(|_| f64::NAN), &Vector::zeros(2), 1.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y^2 from y = 1 blows up at t = 1.
        let err = integrate_flow(|y| y.map(|v| v * v), &Vector::from_vec(vec![1.0]), 2.0, 1e-8)
            .unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. } | Error::NonFinite { .. }));
    }

    #[test]
    fn dense_output_matches_exact_rotation() {
        let opts = FlowOptions {
            tol: 1e-12,
            max_step: Some(0.1),
            ..FlowOptions::default()
        };
        let traj = integrate_flow_dense(rotation, &Vector::from_vec(vec![1.0, 0.0]), 3.0, &opts).unwrap();
        for k in 0..30 {
            let t = 0.1 * k as f64 + 0.037;
            let y = traj.at(t);
            assert!((y[0] - t.cos()).abs() < 1e-6 && (y[1] - t.sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn rk4_order_is_four() {
        let start = Vector::from_vec(vec![1.0, 0.0]);
        let exact = Vector::from_vec(vec![-1.0, 0.0]);
        let errs: Vec<f64> = [40, 80, 160]
            .iter()
            .map(|&n| (rk4_fixed(rotation, &start, PI, n).unwrap() - &exact).norm())
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 3.8);
        }
    }
}
