//! Numeric abstraction for the scoring engine.
//!
//! Achievements are means of means, so any field-like number type works:
//! `f64` for reporting, `f32` for compact storage, and [`Rational`] when a
//! computation must be exact.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact rational scalar; overflows only on very deep, very wide trees.
pub type Rational = num_rational::Ratio<i64>;

/// Number type that achievements, priorities and percentages are computed in.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Lift an integer score into the scalar type.
    fn from_score(score: i64) -> Self {
        Self::from_i64(score).expect("integer scores are representable")
    }

    /// Lift a child count (the divisor of a mean).
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("child counts are representable")
    }

    /// Lossy view used for display and tolerance comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

/// Round to two decimals, ties to even.
///
/// Values within `1e-9` of a hundredth-tie are treated as exact ties so that
/// binary noise (e.g. `15.99 / 6`) does not decide the direction.
pub fn round2(value: f64) -> f64 {
    let scaled = value * 100.0;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let rounded = if (frac - 0.5).abs() < 1e-7 {
        if floor.rem_euclid(2.0) == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    let out = rounded / 100.0;
    if out == 0.0 {
        0.0
    } else {
        out
    }
}

/// Format with exactly two decimals using [`round2`].
pub fn fmt2(value: f64) -> String {
    format!("{:.2}", round2(value))
}
