//! Spherically symmetric transonic shock backgrounds in a spherical shell,
//! their linearization coefficients, and spectral non-solvability checks for
//! the shock-position mode problems.
//!
//! The crate builds divergent-channel transonic flows from the radial steady
//! Euler equations (supersonic branch, one normal shock, subsonic branch),
//! evaluates the shock-relation coefficients `mu0..mu9` and the interior
//! operator profiles `e1..e4`, and decides, mode by spherical-harmonic mode,
//! whether an associated family of nonlocal two-point problems is
//! non-solvable (Hopf comparison, an energy bound in a transformed variable,
//! or a shooting margin). A small differential-form transport solver with a
//! flow-straightening map rounds out the toolbox.

// Negated comparisons like `!(x > 0.0)` are validity guards: they reject
// NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod config;
pub mod error;
pub mod gas;
pub mod interp;
pub mod linearize;
pub mod ode;
pub mod report;
pub mod scondition;
pub mod transport;

pub use error::{Error, Result};
