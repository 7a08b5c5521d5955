use super::{all_finite, Matrix, Vector};
use crate::error::{Error, Result};

/// Base finite-difference step; the step actually used at coordinate `x`
/// is `DEFAULT_FD_STEP * (1 + |x|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

pub fn default_fd_step(x: f64) -> f64 {
    DEFAULT_FD_STEP * (1.0 + x.abs())
}

/// Central-difference Jacobian of `map` at `point`. Column `j` uses the
/// step `step * (1 + |point[j]|)`; the divisor is the representable
/// distance between the two probe points, so affine maps come out exact up
/// to evaluation roundoff.
pub fn jacobian_fd<F>(map: F, point: &Vector, step: f64) -> Result<Matrix>
where
    F: Fn(&Vector) -> Vector,
{
    let center = map(point);
    if !all_finite(&center) {
        return Err(Error::NonFinite { context: "jacobian_fd" });
    }
    let mut jac = Matrix::zeros(center.len(), point.len());
    let mut probe = point.clone();
    for j in 0..point.len() {
        let x = point[j];
        let h = step * (1.0 + x.abs());
        let (xp, xm) = (x + h, x - h);
        probe[j] = xp;
        let fp = map(&probe);
        probe[j] = xm;
        let fm = map(&probe);
        probe[j] = x;
        if !all_finite(&fp) || !all_finite(&fm) {
            return Err(Error::NonFinite { context: "jacobian_fd" });
        }
        jac.set_column(j, &((fp - fm) / (xp - xm)));
    }
    Ok(jac)
}

/// Central difference of a scalar function.
pub fn derivative_fd<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    let h = step * (1.0 + x.abs());
    let (xp, xm) = (x + h, x - h);
    (f(xp) - f(xm)) / (xp - xm)
}
