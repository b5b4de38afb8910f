//! Exact arithmetic in the zero-totalized rationals.
//!
//! [`Rational`] is the carrier of the signed cancellation meadow used for all
//! quantities: a field of fractions whose multiplicative inverse is total, with
//! `inv(0) = 0`, expanded with a signum operation. Values are always stored in
//! lowest terms with a positive denominator, so structural equality is value
//! equality.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// Builds `numer / denom` in lowest terms. A zero denominator yields zero,
    /// matching `p / 0 = p * inv(0) = 0`.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        if denom.is_zero() {
            return Rational::zero();
        }
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational(&self.0 + &other.0)
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational(&self.0 * &other.0)
    }

    pub fn neg(&self) -> Rational {
        Rational(-&self.0)
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        self.add(&other.neg())
    }

    /// Total multiplicative inverse: `inv(0) = 0`.
    pub fn inv(&self) -> Rational {
        if self.0.is_zero() {
            Rational::zero()
        } else {
            Rational(self.0.recip())
        }
    }

    pub fn div(&self, other: &Rational) -> Rational {
        self.mul(&other.inv())
    }

    pub fn sign(&self) -> Rational {
        if self.0.is_zero() {
            Rational::zero()
        } else if self.0.is_positive() {
            Rational::one()
        } else {
            Rational::one().neg()
        }
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    /// `max(u, v) = (sign(u - v) + 1)/2 * (u - v) + v`, evaluated in the meadow.
    pub fn max2(&self, other: &Rational) -> Rational {
        let diff = self.sub(other);
        let half = Rational::from_integer(2).inv();
        diff.sign()
            .add(&Rational::one())
            .mul(&half)
            .mul(&diff)
            .add(other)
    }

    /// `min(u, v) = -max(-u, -v)`.
    pub fn min2(&self, other: &Rational) -> Rational {
        self.neg().max2(&other.neg()).neg()
    }

    /// Integer power. Negative exponents go through the total inverse, so
    /// `pow(0, -n) = 0`.
    pub fn pow(&self, n: i64) -> Rational {
        if n < 0 {
            return self.inv().pow_nat(n.unsigned_abs());
        }
        self.pow_nat(n as u64)
    }

    fn pow_nat(&self, n: u64) -> Rational {
        let exp = u32::try_from(n).expect("exponent out of range");
        Rational(BigRational::new_raw(
            self.0.numer().pow(exp),
            self.0.denom().pow(exp),
        ))
    }

    /// `p <= q` in the meadow sense: `max(p, q) = q`.
    pub fn leq(&self, other: &Rational) -> bool {
        self.max2(other) == *other
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `-?[0-9]+(/[1-9][0-9]*)?` and decimals such as `-0.25`.
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((n, d)) = body.split_once('/') {
            if !digits(n) || !digits(d) || d.starts_with('0') {
                return Err(err());
            }
            Rational::new(
                n.parse::<BigInt>().map_err(|_| err())?,
                d.parse::<BigInt>().map_err(|_| err())?,
            )
        } else if let Some((int, frac)) = body.split_once('.') {
            if !digits(int) || !digits(frac) {
                return Err(err());
            }
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let whole: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
            Rational::new(whole, scale)
        } else {
            if !digits(body) {
                return Err(err());
            }
            Rational::from_integer(body.parse::<BigInt>().map_err(|_| err())?)
        };
        Ok(if negative { value.neg() } else { value })
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc.add(x))
    }
}

impl std::iter::Sum<Rational> for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc.add(&x))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Greatest common divisor of numerator and denominator; always 1 for stored values.
pub fn reduced_gcd(r: &Rational) -> BigInt {
    r.numer().gcd(r.denom())
}
