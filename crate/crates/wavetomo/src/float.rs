//! Scalar abstraction.
//!
//! Every numerical kernel in this crate is generic over [`Float`], a small
//! bundle of the traits the finite-difference stencils, quadratures and ray
//! integrators actually need. It is implemented for `f32` and `f64`; the
//! crate-root aliases fix `f64` as the working precision for experiment-scale
//! runs (the tight identity checks in the test suite need the full mantissa).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float as NumFloat, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar type for grids, fields, solvers and rays.
pub trait Float:
    NumFloat
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    ///
    /// Panics if the value is not representable (only happens for non-finite
    /// input, which would be a programming error in a constant).
    #[inline]
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }

    /// Converts a `usize` (node counts, step counts) into this scalar type.
    #[inline]
    fn cast_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable as float")
    }

    /// Lossy view as `f64`, used by the fixed-width file formats.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float convertible to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}
