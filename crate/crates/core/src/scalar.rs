use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use rustfft::FftNum;

/// Floating point sample type: `f32` or `f64`.
///
/// Every signal-processing routine in this crate is written against this
/// trait so the same pipeline can run in single or double precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + FftNum + Sum + Default + Debug + Display
{
    /// Converts an `f64` constant into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        <Self as NumCast>::from(value).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into the scalar type.
    #[inline]
    fn from_count(value: usize) -> Self {
        <Self as NumCast>::from(value).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
