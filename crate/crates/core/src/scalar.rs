//! Scalar abstractions shared by the numeric modules.
//!
//! Everything that only needs field arithmetic (means, ratios, clamping) is
//! written against [`Scalar`], so it runs on `f32`, `f64` and exact rationals
//! alike. Operations that need a square root additionally require
//! [`RealScalar`].

use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field-like scalar: closed under `+ - * /`, totally ordered on the values
/// we feed it, and convertible to and from primitive numbers.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn hundred() -> Self {
        Self::from_u8(100).expect("100 representable in scalar type")
    }

    fn is_positive(self) -> bool {
        self > Self::zero()
    }

    fn is_non_negative(self) -> bool {
        self >= Self::zero()
    }

    /// Smaller of two values; `self` wins ties and incomparable pairs.
    fn min_of(self, other: Self) -> Self {
        match other.partial_cmp(&self) {
            Some(Ordering::Less) => other,
            _ => self,
        }
    }

    fn max_of(self, other: Self) -> Self {
        match other.partial_cmp(&self) {
            Some(Ordering::Greater) => other,
            _ => self,
        }
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// Floating-point scalar for operations that take roots.
pub trait RealScalar: Scalar + Float {}

impl<T> RealScalar for T where T: Scalar + Float {}

/// True when `v` lies in the half-open efficiency interval (0, 1].
pub(crate) fn in_unit_interval<T: Scalar>(v: T) -> bool {
    v > T::zero() && v <= T::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn min_max_agree_across_types() {
        assert_eq!(2.0f64.min_of(3.0), 2.0);
        assert_eq!(2.0f32.max_of(3.0), 3.0);
        let a = Ratio::new(1i64, 3);
        let b = Ratio::new(1i64, 2);
        assert_eq!(a.min_of(b), a);
        assert_eq!(a.max_of(b), b);
    }

    #[test]
    fn unit_interval_is_half_open() {
        assert!(!in_unit_interval(0.0f64));
        assert!(in_unit_interval(1.0f64));
        assert!(!in_unit_interval(1.0000001f64));
        assert!(!in_unit_interval(f64::NAN));
    }
}
