use super::Vector;
use crate::error::{Error, Result};

/// Composite Simpson rule with `panels` panels (2 * panels + 1 nodes).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> Result<f64> {
    assert!(panels >= 1);
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    let value = acc * h / 3.0;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { context: "quadrature" })
    }
}

/// Integral of the 1-form `form(point, tangent)` along the straight segment
/// from `a` to `b`, by composite Simpson with `segments` panels.
pub fn line_quadrature<F>(form: F, a: &Vector, b: &Vector, segments: usize) -> Result<f64>
where
    F: Fn(&Vector, &Vector) -> f64,
{
    let tangent = b - a;
    simpson(|s| form(&(a + &tangent * s), &tangent), 0.0, 1.0, segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s(x: f64) -> Vector {
        Vector::from_vec(vec![x])
    }

    #[test]
    fn dx_over_unit_interval() {
        let v = line_quadrature(|_, d| d[0], &s(0.0), &s(1.0), 1).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sin_squared_over_full_turn() {
        let v = line_quadrature(|p, d| p[0].sin().powi(2) * d[0], &s(0.0), &s(2.0 * PI), 64).unwrap();
        assert!((v - PI).abs() < 1e-8);
    }

    #[test]
    fn shifted_cosine() {
        let eps = 0.1;
        let v = line_quadrature(|p, d| eps * p[0].cos() * d[0], &s(PI / 2.0), &s(1.5 * PI), 256).unwrap();
        assert!((v + 0.2).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = 1.0 - 1.0f64.cos();
        let e1 = (simpson(f64::sin, 0.0, 1.0, 4).unwrap() - exact).abs();
        let e2 = (simpson(f64::sin, 0.0, 1.0, 8).unwrap() - exact).abs();
        assert!((e1 / e2).log2() > 3.8);
    }

    #[test]
    fn non_finite_integrand() {
        assert!(simpson(|x| 1.0 / x, 0.0, 1.0, 4).is_err());
    }
}
