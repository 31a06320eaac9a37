//! Scalar abstraction for potentials, weights and thresholds.
//!
//! The engine is generic over the scalar type so networks can run in f32 or
//! f64. Concrete f64 aliases live at the crate root.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Numeric type usable for potentials, weights, thresholds and slopes.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from f64, panicking only for values a float type
    /// cannot represent at all.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("value not representable in scalar type")
    }

    /// Conversion to f64 for probability arithmetic and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Logistic function, used as the stochastic firing curve.
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
