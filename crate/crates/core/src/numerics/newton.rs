//! Damped Newton iteration for square systems.

use super::{all_finite, jacobian_fd, Matrix, Vector};
use crate::error::{Error, Result};

const MAX_HALVINGS: usize = 20;
const SINGULAR_RCOND: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Initial fraction of the Newton step, in (0, 1].
    pub damping: f64,
    /// Take the minimum-norm step through a pseudo-inverse instead of
    /// failing when the Jacobian is rank deficient. Needed when the roots
    /// form a continuous family.
    pub min_norm_step: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iterations: 50,
            fd_step: super::DEFAULT_FD_STEP,
            damping: 1.0,
            min_norm_step: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub root: Vector,
    pub residual: f64,
    pub iterations: usize,
    /// Smallest singular value of the Jacobian divided by the largest, at
    /// the last Jacobian evaluation (1 if none was needed).
    pub rcond: f64,
}

/// Newton with a finite-difference Jacobian.
pub fn newton_solve<F>(system: F, seed: &Vector, opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&Vector) -> Vector,
{
    let step = opts.fd_step;
    newton_solve_with(&system, |x| jacobian_fd(&system, x, step), seed, opts)
}

/// Newton with a caller-supplied Jacobian.
pub fn newton_solve_with<F, J>(
    system: F,
    jacobian: J,
    seed: &Vector,
    opts: &NewtonOptions,
) -> Result<NewtonReport>
where
    F: Fn(&Vector) -> Vector,
    J: Fn(&Vector) -> Result<Matrix>,
{
    assert!(opts.residual_tol > 0.0 && opts.max_iterations >= 1 && opts.fd_step > 0.0);
    assert!(opts.damping > 0.0 && opts.damping <= 1.0);

    let mut x = seed.clone();
    let mut r = system(&x);
    if r.len() != x.len() {
        return Err(Error::Dimension(format!(
            "Newton system maps R^{} to R^{}",
            x.len(),
            r.len()
        )));
    }
    if !all_finite(&r) {
        return Err(Error::NonFinite { context: "Newton residual" });
    }
    let mut norm = r.norm();
    let mut rcond = 1.0;

    for it in 0..opts.max_iterations {
        if norm <= opts.residual_tol {
            return Ok(NewtonReport {
                root: x,
                residual: norm,
                iterations: it,
                rcond,
            });
        }
        let jac = jacobian(&x)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if rcond <= SINGULAR_RCOND && !opts.min_norm_step {
            return Err(Error::SingularJacobian {
                iterations: it,
                residual: norm,
            });
        }
        let dx = svd
            .solve(&(-&r), SINGULAR_RCOND * smax.max(f64::MIN_POSITIVE))
            .map_err(|_| Error::SingularJacobian {
                iterations: it,
                residual: norm,
            })?;

        let mut lambda = opts.damping;
        let mut trial = &x + &dx * lambda;
        let mut r_trial = system(&trial);
        let mut n_trial = finite_norm(&r_trial);
        for _ in 0..MAX_HALVINGS {
            if n_trial < norm {
                break;
            }
            lambda *= 0.5;
            trial = &x + &dx * lambda;
            r_trial = system(&trial);
            n_trial = finite_norm(&r_trial);
        }
        if !n_trial.is_finite() {
            return Err(Error::NonFinite { context: "Newton residual" });
        }
        x = trial;
        r = r_trial;
        norm = n_trial;
    }

    if norm <= opts.residual_tol {
        Ok(NewtonReport {
            root: x,
            residual: norm,
            iterations: opts.max_iterations,
            rcond,
        })
    } else {
        Err(Error::MaxIterations {
            iterations: opts.max_iterations,
            residual: norm,
        })
    }
}

fn finite_norm(v: &Vector) -> f64 {
    if all_finite(v) {
        v.norm()
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn scalar_square_root() {
        let rep = newton_solve(|x| v(&[x[0] * x[0] - 4.0]), &v(&[3.0]), &NewtonOptions::default()).unwrap();
        assert!((rep.root[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_system() {
        let rep = newton_solve(
            |x| v(&[x[0] + x[1] - 3.0, x[0] - x[1] - 1.0]),
            &v(&[0.0, 0.0]),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!((rep.root[0] - 2.0).abs() < 1e-10 && (rep.root[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn seeded_at_root_is_unchanged() {
        let sys = |x: &Vector| v(&[x[0] * x[0] - 4.0]);
        let first = newton_solve(sys, &v(&[3.0]), &NewtonOptions::default()).unwrap();
        let second = newton_solve(sys, &first.root, &NewtonOptions::default()).unwrap();
        assert_eq!(second.root, first.root);
        assert_eq!(second.iterations, 0);
    }

    #[test]
    fn singular_jacobian() {
        // x^2 + 1 has a zero derivative at the seed 0.
        let err = newton_solve(|x| v(&[x[0] * x[0] + 1.0]), &v(&[0.0]), &NewtonOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::SingularJacobian { .. }));
    }

    #[test]
    fn max_iterations_reports_residual() {
        let opts = NewtonOptions {
            max_iterations: 3,
            ..NewtonOptions::default()
        };
        let err = newton_solve(|x| v(&[x[0] * x[0] + 1.0]), &v(&[2.0]), &opts).unwrap_err();
        match err {
            Error::MaxIterations { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let err = newton_solve(|x| v(&[x[0], x[0]]), &v(&[1.0]), &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn min_norm_step_converges_onto_a_family() {
        // Roots of x^2 + y^2 - 1 (padded to a square system) form a circle.
        let sys = |x: &Vector| v(&[x[0] * x[0] + x[1] * x[1] - 1.0, 0.0]);
        let opts = NewtonOptions {
            min_norm_step: true,
            ..NewtonOptions::default()
        };
        let rep = newton_solve(sys, &v(&[0.9, 0.9]), &opts).unwrap();
        assert!((rep.root.norm() - 1.0).abs() < 1e-10);
        assert!(rep.rcond < 1e-10);
        assert!(newton_solve(sys, &v(&[0.9, 0.9]), &NewtonOptions::default()).is_err());
    }
}
