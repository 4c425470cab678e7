//! Numeric layer shared by every representation.
//!
//! Reward functions, costs and prices are generic over [`Scalar`]. Two
//! implementations exist: `f64` for large randomized corpora, and exact
//! [`Rational`] for the structured lower-bound families where the lemmas are
//! checked with zero tolerance.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Relative tolerance for equilibrium and class checks on inexact scalars.
pub const REL_TOL: f64 = 1e-9;

/// Absolute slack used when comparing candidate utilities on inexact scalars.
pub const CMP_SLACK: f64 = 1e-12;

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> Rational;

    /// Square root. Exact types round through `f64`.
    fn sqrt(&self) -> Self;

    /// `floor(self)` clamped to `[0, u64::MAX]`.
    fn floor_to_u64(&self) -> u64;

    fn from_int(k: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(k)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `self <= other` up to `rel` relative slack; exact types ignore `rel`.
    fn le_rel(&self, other: &Self, rel: f64) -> bool {
        if Self::EXACT {
            return self <= other;
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        a <= b + rel * 1f64.max(a.abs()).max(b.abs())
    }

    /// Equality up to `rel` relative slack; exact types ignore `rel`.
    fn eq_rel(&self, other: &Self, rel: f64) -> bool {
        self.le_rel(other, rel) && other.le_rel(self, rel)
    }

    /// Strictly greater by more than the candidate comparison slack.
    fn beats(&self, other: &Self) -> bool {
        if Self::EXACT {
            return self > other;
        }
        self.to_f64() > other.to_f64() + CMP_SLACK
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        <Rational as FromPrimitive>::from_f64(*self).expect("finite float")
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn floor_to_u64(&self) -> u64 {
        if *self <= 0.0 {
            0
        } else if *self >= u64::MAX as f64 {
            u64::MAX
        } else {
            self.floor() as u64
        }
    }

    fn from_int(k: i64) -> Self {
        k as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_f64(x: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn sqrt(&self) -> Self {
        if let Some(root) = exact_sqrt(self) {
            return root;
        }
        <Rational as FromPrimitive>::from_f64(Scalar::to_f64(self).sqrt()).expect("finite float")
    }

    fn floor_to_u64(&self) -> u64 {
        if !self.is_positive() {
            return 0;
        }
        self.floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

/// Square root of a rational whose numerator and denominator are perfect squares.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer().sqrt();
    let den = q.denom().sqrt();
    if &(&num * &num) == q.numer() && &(&den * &den) == q.denom() {
        Some(Rational::new(num, den))
    } else {
        None
    }
}

/// Parses `"3"`, `"-0.125"`, `"5/24"` or `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse {
        location: String::new(),
        message: format!("invalid number {text:?}"),
    };
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        q = -q;
    }
    Ok(q)
}

/// Exact textual form: a terminating decimal when one exists, else `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let digits = twos.max(fives);
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10u32), digits));
    let int = scaled.to_integer();
    let negative = int.is_negative();
    let mut text = int.abs().to_string();
    if text.len() <= digits {
        text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
    }
    let split = text.len() - digits;
    format!(
        "{}{}.{}",
        if negative { "-" } else { "" },
        &text[..split],
        &text[split..]
    )
}

/// Formats any scalar: exact form for rationals, shortest round-trip form for floats.
pub fn format_scalar<T: Scalar>(x: &T) -> String {
    if T::EXACT {
        format_rational(&x.to_rational())
    } else {
        format!("{}", x.to_f64())
    }
}

/// Extended-real principal utility; `-∞` marks sets that cannot be incentivized.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub enum Utility<T> {
    NegInfinity,
    Finite(T),
}

impl<T: Scalar> Utility<T> {
    pub fn zero() -> Self {
        Utility::Finite(T::zero())
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Utility::Finite(v) => Some(v),
            Utility::NegInfinity => None,
        }
    }

    pub fn is_neg_infinite(&self) -> bool {
        matches!(self, Utility::NegInfinity)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Utility::Finite(v) => v.to_f64(),
            Utility::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// Candidate comparison: strictly better by more than the float slack.
    pub fn beats(&self, other: &Self) -> bool {
        match (self, other) {
            (Utility::NegInfinity, _) => false,
            (Utility::Finite(_), Utility::NegInfinity) => true,
            (Utility::Finite(a), Utility::Finite(b)) => a.beats(b),
        }
    }
}

impl<T: Scalar> fmt::Display for Utility<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::NegInfinity => write!(f, "-inf"),
            Utility::Finite(v) => write!(f, "{}", format_scalar(v)),
        }
    }
}
