//! Time-reversal reconstruction toolkit for acoustic tomography on bounded
//! domains.
//!
//! The crate revolves around one inverse problem: recover the initial
//! pressure `f` of a wave `(∂²/∂t² − c²Δ)u = 0` in the square `[-1, 1]²`
//! with sound-hard (Neumann) walls from boundary measurements
//! `Λf = u|_{[0,T]×Γ}` on a subset Γ of the boundary. The pieces:
//!
//! * [`grid`] — uniform tensor grids, scalar fields, the weighted L² and
//!   energy (H) inner products the theory is phrased in;
//! * [`region`] — observation subsets Γ and reconstruction subdomains Ω₀;
//! * [`wave`] — the leapfrog forward/backward propagator and boundary traces;
//! * [`elliptic`] — discrete harmonic extensions and energy-orthogonal
//!   projections (conjugate gradients);
//! * [`reversal`] — sharp and averaged time-reversal operators, for full and
//!   partial boundary data;
//! * [`series`] — the Neumann-series reconstruction built from them;
//! * [`phantom`] / [`speed`] — initial-pressure phantoms and sound-speed
//!   models for experiments;
//! * [`ray`] — broken bicharacteristics, the reconstruction operator's
//!   principal symbol along them, and visibility/stability diagnostics;
//! * [`io`] — flat-file formats for fields, traces, and reports.
//!
//! Everything numeric is generic over the scalar type through [`Float`];
//! the [`Real`]-based aliases below pin the default double-precision build.

pub mod elliptic;
pub mod error;
pub mod float;
pub mod grid;
pub mod io;
pub mod phantom;
pub mod ray;
pub mod region;
pub mod reversal;
pub mod series;
pub mod speed;
pub mod wave;

pub use error::{Error, Result};
pub use float::Float;

/// Default scalar type for applications.
pub type Real = f64;
/// A grid over [`Real`].
pub type Grid = grid::Grid2D<Real>;
/// A field over [`Real`].
pub type Field = grid::ScalarField<Real>;
/// A boundary trace over [`Real`].
pub type Trace = wave::BoundaryTrace<Real>;
