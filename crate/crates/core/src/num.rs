//! Scalar abstraction for the scoring math.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used by the metric and significance-test routines:
/// `f32` or `f64`.
pub trait Real: Float + FromPrimitive + AddAssign + Sum<Self> + Debug {}

impl<T> Real for T where T: Float + FromPrimitive + AddAssign + Sum<T> + Debug {}

/// Converts a count to a scalar. Counts in this crate are small enough that
/// the conversion never fails for `f32`/`f64`.
pub fn from_count<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("count representable as scalar")
}

/// `numerator / denominator`, with the zero-denominator convention used by
/// the coreference scorer: an empty denominator scores zero.
pub fn fraction<S: Real>(numerator: S, denominator: S) -> S {
    if denominator == S::zero() {
        S::zero()
    } else {
        numerator / denominator
    }
}
