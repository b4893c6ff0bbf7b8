//! Exact dyadic rationals `n / 2^e`.
//!
//! Every weight and measure in the simulator is a finite sum of powers of
//! two, so this type never rounds. Values are kept canonical: the numerator
//! is odd, or the value is zero with exponent zero.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    exponent: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a dyadic rational: {0:?}")]
pub struct ParseDyadicError(pub String);

impl DyadicRational {
    pub fn new(numerator: impl Into<BigUint>, exponent: u64) -> Self {
        let mut value = DyadicRational {
            numerator: numerator.into(),
            exponent,
        };
        value.normalize();
        value
    }

    /// `2^-exponent`, the weight of a cone of depth `exponent`.
    pub fn pow2_neg(exponent: u64) -> Self {
        DyadicRational {
            numerator: BigUint::one(),
            exponent,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let shift = self
            .numerator
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.exponent);
        if shift > 0 {
            self.numerator >>= shift;
            self.exponent -= shift;
        }
    }

    /// Numerators of both values scaled to the common exponent.
    fn aligned(&self, other: &Self) -> (BigUint, BigUint, u64) {
        let exponent = self.exponent.max(other.exponent);
        let a = &self.numerator << (exponent - self.exponent);
        let b = &other.numerator << (exponent - other.exponent);
        (a, b, exponent)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let (a, b, exponent) = self.aligned(other);
        if a < b {
            return None;
        }
        Some(DyadicRational::new(a - b, exponent))
    }

    /// Absolute difference.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let (a, b, exponent) = self.aligned(other);
        if a >= b {
            DyadicRational::new(a - b, exponent)
        } else {
            DyadicRational::new(b - a, exponent)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        // Keep the 64 leading bits of the numerator so huge values do not overflow.
        let drop = bits.saturating_sub(64);
        let mantissa = (&self.numerator >> drop).to_f64().unwrap_or(f64::INFINITY);
        let scale = drop as i64 - self.exponent as i64;
        mantissa * 2f64.powi(scale.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Binary logarithm; `-inf` for zero.
    pub fn log2(&self) -> f64 {
        if self.numerator.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.numerator.bits();
        let drop = bits.saturating_sub(64);
        let mantissa = (&self.numerator >> drop).to_f64().unwrap_or(f64::INFINITY);
        mantissa.log2() + drop as f64 - self.exponent as f64
    }

    /// The denominator `2^exponent` as a big integer.
    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }
}

impl Zero for DyadicRational {
    fn zero() -> Self {
        DyadicRational {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl One for DyadicRational {
    fn one() -> Self {
        DyadicRational::pow2_neg(0)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, exponent) = self.aligned(rhs);
        DyadicRational::new(a + b, exponent)
    }
}

impl AddAssign for DyadicRational {
    fn add_assign(&mut self, rhs: Self) {
        *self = &*self + &rhs;
    }
}

impl<'a> AddAssign<&'a DyadicRational> for DyadicRational {
    fn add_assign(&mut self, rhs: &DyadicRational) {
        *self = &*self + rhs;
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: Self) -> Self {
        DyadicRational::new(
            self.numerator * rhs.numerator,
            self.exponent + rhs.exponent,
        )
    }
}

impl Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a DyadicRational> for DyadicRational {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| &acc + x)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for DyadicRational {
    fn from(value: u64) -> Self {
        DyadicRational::new(value, 0)
    }
}

/// Formats as `n` when integral, otherwise `n/2^e` written out in decimal.
impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

impl FromStr for DyadicRational {
    type Err = ParseDyadicError;

    /// Accepts `n`, `n/d` with `d` a power of two, or `2^-e`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let s = s.trim();
        if let Some(exp) = s.strip_prefix("2^-") {
            let exponent: u64 = exp.trim().parse().map_err(|_| err())?;
            return Ok(DyadicRational::pow2_neg(exponent));
        }
        match s.split_once('/') {
            None => {
                let n: BigUint = s.parse().map_err(|_| err())?;
                Ok(DyadicRational::new(n, 0))
            }
            Some((n, d)) => {
                let n: BigUint = n.trim().parse().map_err(|_| err())?;
                let d: BigUint = d.trim().parse().map_err(|_| err())?;
                if d.is_zero() || d.count_ones() != 1 {
                    return Err(err());
                }
                let exponent = d.trailing_zeros().unwrap_or(0);
                Ok(DyadicRational::new(n, exponent))
            }
        }
    }
}

impl serde::Serialize for DyadicRational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for DyadicRational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(6u32, 3);
        assert_eq!(x.numerator(), &BigUint::from(3u32));
        assert_eq!(x.exponent(), 2);
        assert_eq!(DyadicRational::new(0u32, 9), DyadicRational::zero());
        assert_eq!(DyadicRational::new(8u32, 3), DyadicRational::one());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(d("1/2") + d("1/4"), d("3/4"));
        assert_eq!(d("1/2") + d("1/2"), d("1"));
        assert_eq!(d("3/4").checked_sub(&d("1/4")), Some(d("1/2")));
        assert_eq!(d("1/4").checked_sub(&d("1/2")), None);
        assert_eq!(d("1/4").abs_diff(&d("1/2")), d("1/4"));
        assert_eq!(d("3/4") * d("1/2"), d("3/8"));
        assert!(d("1/2") > d("3/8"));
        assert!(d("2^-10") < d("1/512"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("3/4").to_string(), "3/4");
        assert_eq!(d("4/8").to_string(), "1/2");
        assert_eq!(d("2^-3").to_string(), "1/8");
        assert_eq!(d("0").to_string(), "0");
        assert!("1/3".parse::<DyadicRational>().is_err());
        assert!("x".parse::<DyadicRational>().is_err());
    }

    #[test]
    fn float_views() {
        assert_eq!(d("3/4").to_f64(), 0.75);
        assert_eq!(d("1/8").log2(), -3.0);
        assert_eq!(DyadicRational::zero().log2(), f64::NEG_INFINITY);
        let tiny = DyadicRational::pow2_neg(2000);
        assert_eq!(tiny.log2(), -2000.0);
    }

    #[test]
    fn sum_of_many_cones_is_exact() {
        // 2^-1 + 2^-2 + ... + 2^-200 + 2^-200 = 1
        let mut total: DyadicRational = (1..=200).map(DyadicRational::pow2_neg).sum();
        total += DyadicRational::pow2_neg(200);
        assert_eq!(total, DyadicRational::one());
    }
}
