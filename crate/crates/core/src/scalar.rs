//! Floating-point scalar abstraction shared by the baseline trainer and the scorer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for model parameters, probabilities and F-scores.
///
/// Implemented for `f32` and `f64`. Exact counting results (micro-F1 as a
/// ratio, oversampling averages) use [`num_rational::Ratio`] instead.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the target type cannot
    /// represent finite values at all.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal representable")
    }

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Probability clamp used before taking logarithms: `1e-12`, or the
    /// machine epsilon when that is coarser.
    fn prob_clamp() -> Self {
        Self::lit(1e-12).max(Self::epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Logistic function, evaluated so that neither branch overflows.
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_half_at_zero() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert_eq!(sigmoid(0.0f32), 0.5);
    }

    #[test]
    fn sigmoid_saturates_without_nan() {
        assert!(sigmoid(1000.0f64) <= 1.0);
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert!(!sigmoid(-1000.0f32).is_nan());
    }

    #[test]
    fn clamp_tracks_precision() {
        assert_eq!(f64::prob_clamp(), 1e-12);
        assert_eq!(f32::prob_clamp(), f32::EPSILON);
    }
}
