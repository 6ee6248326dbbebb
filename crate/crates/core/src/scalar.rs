//! Floating point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the geometry, sequencing and control math is written over.
///
/// Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the target cannot represent it at all.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[-π, π]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let pi = T::PI();
    let two_pi = T::two_pi();
    if angle >= -pi && angle <= pi {
        return angle;
    }
    let mut a = (angle + pi) % two_pi;
    if a < T::zero() {
        a = a + two_pi;
    }
    a - pi
}
