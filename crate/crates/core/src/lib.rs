//! Simulation and verification of a one-phase free boundary problem with a
//! kinetic front condition, as used for diffusant migration into rubber.
//!
//! The moving domain `[0, s(t)]` is mapped onto `[0, 1]` with `y = z / s(t)`;
//! the transformed field and the front are advanced together by an implicit
//! finite-difference scheme (see [`solver`]). [`diagnostics`] collects the
//! analyses run on the resulting reports and [`cli`] the file formats and
//! commands of the `kinetic-front` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod grid;
pub mod model;
pub mod solver;

pub use diagnostics::SolveReport;
pub use grid::{Grid, PhysicalField, TransformedState};
pub use model::{BoundaryDriver, InitialProfile, ProblemSpec, Table};
pub use solver::{run, run_with_stride, step, AdvectionScheme, Picard, SolverConfig};
