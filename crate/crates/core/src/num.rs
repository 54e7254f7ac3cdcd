//! Scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the quantile-mapping kernels are generic over.
///
/// Implemented for `f32` and `f64`. The gridded pipeline always runs in
/// `f64`; `f32` is useful for light-weight evaluation of fitted maps.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count to the scalar type.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
