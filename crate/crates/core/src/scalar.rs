//! Exact rational scalars and their extension by `-inf` / `+inf`.
//!
//! Every quantity in the crate is a [`Scalar`]: an arbitrary-precision
//! rational kept in lowest terms, so equality and ordering are decidable and
//! no verdict ever depends on a floating-point tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

impl Scalar {
    /// `numer / denom`. Panics when `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Scalar(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Scalar(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Scalar) -> Scalar {
        (self + other) / Scalar::from(2)
    }

    /// Lossy conversion, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Shortest exact decimal rendering, when the denominator has only the
    /// prime factors 2 and 5. `None` for values like `1/3`.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let ten = BigInt::from(10);
        let (mut twos, mut fives) = (0u32, 0u32);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let digits = twos.max(fives);
        if digits == 0 {
            return Some(self.0.numer().to_string());
        }
        let scaled = self.0.numer().abs() * num_traits::pow(ten, digits as usize) / self.0.denom();
        let mut text = scaled.to_string();
        if text.len() <= digits as usize {
            text = "0".repeat(digits as usize - text.len() + 1) + &text;
        }
        let (int_part, frac_part) = text.split_at(text.len() - digits as usize);
        let sign = if self.0.is_negative() { "-" } else { "" };
        Some(format!("{sign}{int_part}.{frac_part}"))
    }

    /// Decimal when exactly representable, `p/q` otherwise. Used when writing
    /// input-style files (function and df payloads).
    pub fn to_input_string(&self) -> String {
        self.to_decimal_string().unwrap_or_else(|| self.to_string())
    }

    pub fn min(self, other: Scalar) -> Scalar {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Scalar) -> Scalar {
        std::cmp::max(self, other)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar(BigRational::from_integer(v.into()))
    }
}

impl From<i32> for Scalar {
    fn from(v: i32) -> Self {
        Scalar::from(v as i64)
    }
}

impl From<BigRational> for Scalar {
    fn from(v: BigRational) -> Self {
        Scalar(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v: BigInt = digits.parse().ok()?;
    Some(if s.starts_with('-') { -v } else { v })
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts integers (`-3`), decimals (`0.25`, `-.5`, `2.`) and ratios
    /// (`p/q`). Parsing is exact: `"0.3"` is `3/10`.
    fn from_str(raw: &str) -> Result<Self, Error> {
        let s = raw.trim();
        let bad = || Error::Parse(format!("not an exact number: {raw:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_integer(p.trim()).ok_or_else(bad)?;
            let q = parse_integer(q.trim()).ok_or_else(bad)?;
            return Scalar::from_big(p, q);
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let negative = int_part.starts_with('-');
            let int_digits = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
            if int_digits.is_empty() && frac_part.is_empty() {
                return Err(bad());
            }
            let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
            if !all_digits(int_digits) || !all_digits(frac_part) {
                return Err(bad());
            }
            let joined = format!("{int_digits}{frac_part}");
            let mut numer: BigInt = if joined.is_empty() {
                BigInt::zero()
            } else {
                joined.parse().map_err(|_| bad())?
            };
            if negative {
                numer = -numer;
            }
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            return Scalar::from_big(numer, denom);
        }
        let v = parse_integer(s).ok_or_else(bad)?;
        Ok(Scalar(BigRational::from_integer(v)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct ScalarVisitor;

impl Visitor<'_> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an exact number as a string (\"0.3\", \"1/3\") or an integer")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar(BigRational::from_integer(v.into())))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not exact; quote it as a string"
        )))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

/// A [`Scalar`] or one of the two infinite endpoints.
///
/// Variant order gives the total order `NegInf < Finite(_) < PosInf`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtScalar {
    NegInf,
    Finite(Scalar),
    PosInf,
}

impl ExtScalar {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtScalar::Finite(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    /// Compare against a finite scalar.
    pub fn cmp_scalar(&self, other: &Scalar) -> Ordering {
        match self {
            ExtScalar::NegInf => Ordering::Less,
            ExtScalar::Finite(s) => s.cmp(other),
            ExtScalar::PosInf => Ordering::Greater,
        }
    }
}

impl From<Scalar> for ExtScalar {
    fn from(s: Scalar) -> Self {
        ExtScalar::Finite(s)
    }
}

impl From<&Scalar> for ExtScalar {
    fn from(s: &Scalar) -> Self {
        ExtScalar::Finite(s.clone())
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::NegInf => f.write_str("-inf"),
            ExtScalar::Finite(s) => fmt::Display::fmt(s, f),
            ExtScalar::PosInf => f.write_str("+inf"),
        }
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" => Ok(ExtScalar::NegInf),
            "+inf" | "inf" | "+infinity" | "infinity" => Ok(ExtScalar::PosInf),
            _ => s.parse().map(ExtScalar::Finite),
        }
    }
}

impl Serialize for ExtScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct ExtScalarVisitor;

impl Visitor<'_> for ExtScalarVisitor {
    type Value = ExtScalar;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an exact number string, an integer, \"-inf\" or \"+inf\"")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtScalar, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtScalar, E> {
        Ok(ExtScalar::Finite(Scalar::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtScalar, E> {
        ScalarVisitor.visit_u64(v).map(ExtScalar::Finite)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtScalar, E> {
        ScalarVisitor.visit_f64(v).map(ExtScalar::Finite)
    }
}

impl<'de> Deserialize<'de> for ExtScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtScalarVisitor)
    }
}

/// `m + 1` equally spaced points from `lo` to `hi` inclusive.
pub fn grid(lo: &Scalar, hi: &Scalar, m: u32) -> Vec<Scalar> {
    let m = m.max(1);
    let step = (hi - lo) / Scalar::from(m as i64);
    (0..=m as i64)
        .map(|k| lo + &step * Scalar::from(k))
        .collect()
}

/// Shorthand used throughout the tests: `q(3, 10)` is `3/10`.
pub fn q(numer: i64, denom: i64) -> Scalar {
    Scalar::new(numer, denom)
}
