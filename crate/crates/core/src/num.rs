//! Scalar abstraction shared by the statistics and scoring code.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by [`crate::stats`] and the coverage scorecards.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `Real` in this crate can represent
    /// (an approximation of) any finite `f64`, so this never fails.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ratio that maps an empty denominator to zero.
pub(crate) fn ratio<T: Real>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::count(num) / T::count(den)
    }
}
