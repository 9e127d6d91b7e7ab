//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the simulation kernels are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that the library checks at
/// runtime are widened to a few ulps of the chosen type where the `f64`
/// threshold would be meaningless (see [`Real::tolerance`]).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite literals and the two provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_index(i: i64) -> Self {
        Self::from_i64(i).expect("index representable in scalar type")
    }

    /// `max(requested, 64 ulp)`, so that f64-oriented thresholds remain usable for f32.
    #[inline]
    fn tolerance(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Reduces an angle into `[0, 2π)`.
    #[inline]
    fn wrap_angle(self) -> Self {
        let tau = Self::TAU();
        let r = self - (self / tau).floor() * tau;
        if r >= tau || r < Self::zero() {
            Self::zero()
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
