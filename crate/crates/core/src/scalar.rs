//! Scalar abstraction shared by every numerical kernel.
//!
//! All operators are complex matrices over a real field `T`. The crate is
//! written against [`Real`] so the same code runs in `f32` and `f64`; the
//! tolerances quoted throughout are tuned for `f64` and are clamped to a few
//! hundred ulps when `T` is coarser (see [`tol`]).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point field the library is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal must be representable")
    }

    /// Lossy conversion used at serialization boundaries.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize must be representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Tolerance `x`, never tighter than 256 machine epsilons of `T`.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    T::lit(x).max(T::epsilon() * T::lit(256.0))
}
