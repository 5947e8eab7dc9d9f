//! Numeric abstraction for load values.
//!
//! All solver arithmetic is written against [`Scalar`], so the same code runs
//! on exact rationals (the default, see [`crate::Rat`]) or on floats.
//! Everything the algorithms rely on is exact over rationals: equality of an
//! optimum against an independently computed value is a meaningful test.

use std::fmt::Debug;

use num::rational::Ratio;
use num::traits::{FromPrimitive, ToPrimitive};
use num::{Integer, Num};

/// A load scalar: field arithmetic, a total order on the values the solvers
/// produce, and conversions against machine counts.
pub trait Scalar: Num + PartialOrd + Copy + Debug + Send + Sync + 'static {
    fn from_u64(v: u64) -> Self;

    /// Largest integer not above `self`. Caller guarantees `self >= 0` and
    /// that the result fits a `u64`.
    fn floor_u64(&self) -> u64;

    /// Smallest integer not below `self`. Same preconditions as
    /// [`Scalar::floor_u64`].
    fn ceil_u64(&self) -> u64;
}

impl<I> Scalar for Ratio<I>
where
    I: Integer + Copy + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static,
{
    fn from_u64(v: u64) -> Self {
        Ratio::from_integer(I::from_u64(v).expect("count fits the rational's integer type"))
    }

    fn floor_u64(&self) -> u64 {
        self.floor()
            .to_integer()
            .to_u64()
            .expect("non-negative value fits u64")
    }

    fn ceil_u64(&self) -> u64 {
        self.ceil()
            .to_integer()
            .to_u64()
            .expect("non-negative value fits u64")
    }
}

macro_rules! impl_scalar_float {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_u64(v: u64) -> Self {
                v as $t
            }

            fn floor_u64(&self) -> u64 {
                self.floor() as u64
            }

            fn ceil_u64(&self) -> u64 {
                self.ceil() as u64
            }
        }
    };
}

impl_scalar_float!(f32);
impl_scalar_float!(f64);
