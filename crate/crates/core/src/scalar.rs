//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the plate, eigen and flutter code is generic over.
///
/// Implemented for `f32` and `f64`. Thin-plate systems at `a/h = 100` are badly
/// conditioned, so the full pipeline is only meaningful in `f64`; the small
/// kernels (material laws, dense eigen, the reduced flutter pencil) work in
/// either precision.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold
    /// at all, which never happens for the finite constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative closeness test used by invariants and tests alike.
#[inline]
pub fn rel_close<T: Real>(a: T, b: T, rtol: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    (a - b).abs() <= rtol * scale
}
