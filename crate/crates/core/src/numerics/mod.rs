//! Numerical kernel: adaptive flow integration, finite differences,
//! damped Newton iteration and composite Simpson quadrature.
//!
//! Everything here is a pure function of its inputs.

mod diff;
mod newton;
mod ode;
mod quadrature;

pub use diff::{default_fd_step, derivative_fd, jacobian_fd, DEFAULT_FD_STEP};
pub use newton::{newton_solve, newton_solve_with, NewtonOptions, NewtonReport};
pub use ode::{integrate_flow, integrate_flow_dense, rk4_fixed, FlowOptions, FlowSample, Trajectory};
pub use quadrature::{line_quadrature, simpson};

/// Dense real vector used throughout the kernel.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix used throughout the kernel.
pub type Matrix = nalgebra::DMatrix<f64>;

pub(crate) fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}
