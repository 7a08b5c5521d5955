//! Numerical toolkit for Lagrangian slices of contact manifolds and their
//! Reeb chords.
//!
//! The layers, bottom up:
//!
//! * [`numerics`]: adaptive integration, Newton, quadrature, differences.
//! * [`contact`]: the standard contact models and their symplectization.
//! * [`slice`]: parametrized slices, the slice checks, periods, primitives.
//! * [`chords`]: Reeb chord search by projection double points and shooting.
//! * [`collar`]: actions, classification, the extension of `h` and the
//!   collarability report.
//! * [`catalog`]: closed-form examples.
//! * [`cli`]: manifests, report documents and plot export.

pub mod catalog;
pub mod chords;
pub mod cli;
pub mod collar;
pub mod contact;
pub mod error;
pub mod numerics;
pub mod slice;
pub mod spatial;

pub use error::{Error, Result};
