//! The scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// All tolerances in the crate are written as `f64` literals and converted
/// through [`lit`], so they degrade gracefully (by saturation at the type's
/// epsilon) when instantiated at `f32`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal to the target scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count to the target scalar.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Relative tolerance that never drops below a few ulps of `T`.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    let eps = T::epsilon() * lit(8.0);
    lit::<T>(x).max(eps)
}
