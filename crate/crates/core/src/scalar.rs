//! Scalar traits the numeric modules are generic over.
//!
//! Credit allocation only needs field arithmetic, so it runs on exact
//! rationals as well as floats. Everything downstream of credit (medians,
//! ratios, correlations) needs [`Real`], which is implemented for `f32` and
//! `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field arithmetic with an ordering: enough to build and normalize weight
/// vectors.
pub trait Field: Num + Copy + PartialOrd + FromPrimitive + Debug + Send + Sync + 'static {
    /// `numer / denom`, exact when the type allows it.
    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer).expect("numerator representable")
            / Self::from_i64(denom).expect("denominator representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Field for f32 {}
impl Field for f64 {}
impl Field for Ratio<i64> {}
impl Field for Ratio<i128> {}

/// Floating point scalar used for indicators and comparisons.
pub trait Real: Field + Float + Sum + Display + ToPrimitive {
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn hundred() -> Self {
        Self::from_count(100)
    }
}

impl Real for f32 {}
impl Real for f64 {}
