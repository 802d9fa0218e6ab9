//! Scalar abstractions shared by the metric and probability code.
//!
//! Metrics only need field arithmetic over counts, so they are generic over
//! [`Scalar`] and work with `f32`, `f64` and exact rationals alike. Class
//! distributions additionally need floating point behaviour and use
//! [`Probability`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Numeric type that metric computations can be carried out in.
pub trait Scalar: Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug {
    /// Lifts a token count into the scalar type.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count not representable in scalar type")
    }

    /// Lossy view used for printing and tolerance comparisons.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug {}

/// Floating point scalar used for class probabilities (`f32` or `f64`).
pub trait Probability: Scalar + Float + Send + Sync + 'static {
    /// Absolute tolerance on the row sum of a distribution.
    fn sum_tolerance() -> Self {
        Self::from_f64(1e-6).expect("tolerance representable")
    }

    fn cast<U: Probability>(self) -> U {
        U::from_f64(self.to_f64_lossy()).expect("finite probability")
    }
}

impl Probability for f32 {
    fn sum_tolerance() -> Self {
        // f32 softmax rows routinely miss 1.0 by a few ulps
        2e-6
    }
}

impl Probability for f64 {}
