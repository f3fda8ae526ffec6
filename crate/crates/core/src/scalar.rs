//! Scalar abstraction: every numeric path in this crate is generic over the
//! real field, so the same code instantiates at `f64` (the default used by the
//! CLI and the file formats) and at `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the library is generic over.
///
/// Implemented by `f32` and `f64`. The bound collects what the numeric code
/// needs: IEEE float arithmetic, the usual constants, in-place operators,
/// conversions from integer sizes, and summation.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar.
///
/// Every `Real` type represents all finite `f64` values at least approximately,
/// so the conversion cannot fail for the constants used in this crate.
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 converts into any Real scalar")
}

/// Converts a dimension or index into the working scalar.
pub fn real_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize converts into any Real scalar")
}

/// Converts the working scalar to `f64` for error reporting.
pub fn lossy_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
