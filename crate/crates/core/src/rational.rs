//! Arbitrary-precision rationals with a canonical `"num/den"` text form.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error(
        "`{0}` looks like a decimal; exact inputs must be written as a fraction such as `{1}`"
    )]
    Decimal(String, String),
    #[error("`{0}` is not an integer or `num/den` fraction")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "zero denominator");
        ExactRational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn from_big(r: BigRational) -> Self {
        ExactRational(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        ExactRational(self.0.recip())
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn powi(&self, exp: i32) -> Self {
        ExactRational(num_traits::pow::Pow::pow(&self.0, exp))
    }

    /// Nearest `f64`, saturating to an infinity when out of range.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }

    /// `self^exponent` when the result is rational, `None` otherwise.
    ///
    /// Requires `self > 0` unless the exponent is a nonnegative integer.
    pub fn pow_exact(&self, exponent: &ExactRational) -> Option<ExactRational> {
        let p = exponent.numer().to_i32()?;
        let q = exponent.denom().to_u32()?;
        if q == 1 {
            if p < 0 && self.is_zero() {
                return None;
            }
            return Some(self.powi(p));
        }
        if self.is_zero() {
            return (p > 0).then(ExactRational::zero);
        }
        if self.is_negative() {
            return None;
        }
        let root = |n: &BigInt| -> Option<BigInt> {
            let r = n.nth_root(q);
            (num_traits::pow::Pow::pow(&r, q) == *n).then_some(r)
        };
        let base = ExactRational::new(root(self.numer())?, root(self.denom())?);
        Some(base.powi(p))
    }
}

impl FromStr for ExactRational {
    type Err = ParseRationalError;

    /// Accepts `"n"` or `"n/d"`; decimal literals are rejected so that an
    /// exact parameter can never be silently rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if s.contains(['.', 'e', 'E']) && !s.contains('/') {
            let hint = decimal_hint(s).unwrap_or_else(|| "3/10".to_string());
            return Err(ParseRationalError::Decimal(s.to_string(), hint));
        }
        let parse_int = |t: &str| -> Result<BigInt, ParseRationalError> {
            let t = t.trim();
            let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
                return Err(ParseRationalError::Malformed(s.to_string()));
            }
            BigInt::from_str(t).map_err(|_| ParseRationalError::Malformed(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(ExactRational::from_integer(parse_int(s)?)),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(ParseRationalError::ZeroDenominator(s.to_string()));
                }
                Ok(ExactRational::new(n, d))
            }
        }
    }
}

/// Turns `"0.3"` into `"3/10"` for error messages.
fn decimal_hint(s: &str) -> Option<String> {
    let (int, frac) = s.split_once('.')?;
    if !frac.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n = BigInt::from_str(&format!("{int}{frac}")).ok()?;
    let d = num_traits::pow::Pow::pow(BigInt::from(10), frac.len() as u32);
    Some(ExactRational::new(n, d).to_string())
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        ExactRational::from_integer(n)
    }
}

impl From<BigInt> for ExactRational {
    fn from(n: BigInt) -> Self {
        ExactRational::from_integer(n)
    }
}

impl PartialEq<i64> for ExactRational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for ExactRational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

macro_rules! forward_binop {
    ($Trait:ident, $method:ident, $AssignTrait:ident, $assign:ident) => {
        impl $Trait<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational($Trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $Trait<&'a ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational($Trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $Trait<ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational($Trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $Trait<&'b ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'b ExactRational) -> ExactRational {
                ExactRational($Trait::$method(&self.0, &rhs.0))
            }
        }
        impl $Trait<i64> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: i64) -> ExactRational {
                $Trait::$method(self, ExactRational::from(rhs))
            }
        }
        impl<'a> $Trait<i64> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: i64) -> ExactRational {
                $Trait::$method(self, ExactRational::from(rhs))
            }
        }
        impl $AssignTrait<ExactRational> for ExactRational {
            fn $assign(&mut self, rhs: ExactRational) {
                $AssignTrait::$assign(&mut self.0, rhs.0)
            }
        }
        impl<'a> $AssignTrait<&'a ExactRational> for ExactRational {
            fn $assign(&mut self, rhs: &'a ExactRational) {
                $AssignTrait::$assign(&mut self.0, &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);
forward_binop!(Div, div, DivAssign, div_assign);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-&self.0)
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactRational> for ExactRational {
    fn sum<I: Iterator<Item = &'a ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl Product for ExactRational {
    fn product<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::one(), |acc, x| acc * x)
    }
}

/// Shorthand used throughout tests and constructors: `rat(3, 10)` is 3/10.
pub fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_form() {
        assert_eq!(rat(6, -14).to_string(), "-3/7");
        assert_eq!(rat(4, 2).to_string(), "2/1");
        assert_eq!(ExactRational::zero().to_string(), "0/1");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!("7".parse::<ExactRational>().unwrap(), rat(7, 1));
        assert_eq!("-6/14".parse::<ExactRational>().unwrap(), rat(-3, 7));
        assert_eq!(
            "2000000001/1000000000".parse::<ExactRational>().unwrap(),
            ExactRational::new(2_000_000_001i64, 1_000_000_000i64)
        );
    }

    #[test]
    fn parse_rejects_decimals_with_hint() {
        let err = "0.3".parse::<ExactRational>().unwrap_err();
        assert_eq!(
            err,
            ParseRationalError::Decimal("0.3".into(), "3/10".into())
        );
        assert!(err.to_string().contains("3/10"));
        assert!("1e-9".parse::<ExactRational>().is_err());
        assert!("1/0".parse::<ExactRational>().is_err());
        assert!("x/2".parse::<ExactRational>().is_err());
        assert!("".parse::<ExactRational>().is_err());
    }

    #[test]
    fn exact_powers() {
        assert_eq!(rat(4, 25).pow_exact(&rat(1, 2)), Some(rat(2, 5)));
        assert_eq!(rat(1, 4).pow_exact(&rat(3, 2)), Some(rat(1, 8)));
        assert_eq!(rat(1, 2).pow_exact(&rat(1, 2)), None);
        assert_eq!(rat(2, 3).pow_exact(&rat(-2, 1)), Some(rat(9, 4)));
        assert_eq!(rat(-1, 2).pow_exact(&rat(1, 2)), None);
    }

    #[test]
    fn json_round_trip() {
        let x = rat(-3, 7);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "\"-3/7\"");
        assert_eq!(serde_json::from_str::<ExactRational>(&s).unwrap(), x);
    }
}
