//! Scalar types usable as ant weights and measures.
//!
//! The simulator is generic over the weight type. [`DyadicRational`] and
//! [`BigRational`] are exact; `f64` and `f32` are accepted for quick
//! approximate runs, where comparisons against the threshold may round.

use std::fmt::{Debug, Display};
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::DyadicRational;

pub trait Weight:
    Clone + Debug + Display + PartialOrd + Zero + One + Add<Output = Self> + Send + Sync + 'static
{
    /// Whether sums and comparisons are exact.
    const EXACT: bool;

    /// The value `2^-exponent`.
    fn pow2_neg(exponent: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Converts an exact dyadic value, rounding only for float scalars.
    fn from_dyadic(value: &DyadicRational) -> Self;
}

impl Weight for DyadicRational {
    const EXACT: bool = true;

    fn pow2_neg(exponent: u64) -> Self {
        DyadicRational::pow2_neg(exponent)
    }

    fn to_f64(&self) -> f64 {
        DyadicRational::to_f64(self)
    }

    fn from_dyadic(value: &DyadicRational) -> Self {
        value.clone()
    }
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn pow2_neg(exponent: u64) -> Self {
        BigRational::new(
            BigInt::one(),
            BigInt::from(BigUint::one() << exponent),
        )
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_dyadic(value: &DyadicRational) -> Self {
        BigRational::new(
            BigInt::from(value.numerator().clone()),
            BigInt::from(value.denominator()),
        )
    }
}

macro_rules! float_weight {
    ($($t:ty),*) => {$(
        impl Weight for $t {
            const EXACT: bool = false;

            fn pow2_neg(exponent: u64) -> Self {
                let e = exponent.min(i32::MAX as u64) as i32;
                (2.0 as $t).powi(-e)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn from_dyadic(value: &DyadicRational) -> Self {
                value.to_f64() as $t
            }
        }
    )*};
}

float_weight!(f32, f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn halves<W: Weight>() -> W {
        W::pow2_neg(1) + W::pow2_neg(2) + W::pow2_neg(2)
    }

    #[test]
    fn every_scalar_sums_cones_to_one() {
        assert!(halves::<DyadicRational>().is_one());
        assert!(halves::<BigRational>().is_one());
        assert_eq!(halves::<f64>(), 1.0);
        assert_eq!(halves::<f32>(), 1.0);
    }

    #[test]
    fn rational_matches_dyadic() {
        let x: DyadicRational = "5/32".parse().unwrap();
        let r = BigRational::from_dyadic(&x);
        assert_eq!(r, BigRational::new(BigInt::from(5), BigInt::from(32)));
    }
}
