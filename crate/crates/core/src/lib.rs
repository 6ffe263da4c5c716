//! Numerical laboratory for weak set flows: level-set mean curvature flow with
//! an ambient transport field on uniform Cartesian grids, analytic implicit
//! barriers, a polygonal curve-shortening simulator, and a harness of
//! executable comparison/avoidance/distance checks with discretization-aware
//! tolerances.
//!
//! The crate is organized around the moving parts of the theory:
//!
//! - [`grid`], [`field`], [`dist`]: grids, sampled scalar fields, closed-set
//!   masks, exact distance transforms, and the parabolic spacetime metric.
//! - [`ambient`], [`barrier`]: the transport field `X` with its Jacobian
//!   bounds, and analytic barriers `K(t) = {f <= 0}` with exact evaluation of
//!   the boundary quantities `nu`, `H`, `v`, `Phi`, `Phi_X`.
//! - [`engine`]: explicit time stepping of
//!   `u_t = |grad u| Div(grad u / |grad u|) - X . grad u`,
//!   reinitialization, extinction detection, and arrival-time extraction.
//! - [`harness`]: theorem checks (avoidance, exponential distance bounds,
//!   finite speed, semigroup, containment, boundary flows).
//! - [`brakke`]: polygonal curves moving by curvature plus transport and the
//!   integral inequality check for nonnegative test functions.
//! - [`separator`]: the harmonic separating hypersurface between two sets at
//!   distance `2r`.

pub mod ambient;
pub mod barrier;
pub mod brakke;
pub mod dist;
pub mod engine;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod separator;

pub use ambient::AmbientField;
pub use barrier::{BarrierPointReport, ImplicitBarrier, StrongClassification};
pub use engine::{ArrivalTimeField, FlowParams};
pub use error::{Error, Result};
pub use field::{ClosedSetMask, MaskRepr, ScalarField, SpacetimeTrack};
pub use grid::Grid;
pub use harness::{TheoremCheckReport, TheoremId};

/// Point in the ambient space. 2-d grids use the first two components and
/// keep the third at zero.
pub type Point = nalgebra::Vector3<f64>;
