//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type through [`Real`].

use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the solver operates on: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + FftNum + Sum {
    /// Lossy conversion of an `f64` constant into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// `Self` as `f64`, for reporting and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }
}

impl Real for f32 {}
impl Real for f64 {}
