//! Exact positive rational weights.
//!
//! Every benefit and cost in the engine is a reduced big rational. Nothing on
//! the algorithmic path touches floating point: level and rounding decisions
//! sit exactly on powers of two and must be decided by integer comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational used for sums, thresholds and epsilons.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("weight must be positive, got {0}")]
    NonPositive(String),
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// A strictly positive exact rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Rational);

impl Weight {
    pub fn new(value: Rational) -> Result<Self, WeightError> {
        if value.is_positive() {
            Ok(Weight(value))
        } else {
            Err(WeightError::NonPositive(render(&value)))
        }
    }

    pub fn one() -> Self {
        Weight(Rational::one())
    }

    pub fn from_int(value: u64) -> Result<Self, WeightError> {
        Self::new(Rational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(numer: u64, denom: u64) -> Result<Self, WeightError> {
        if denom == 0 {
            return Err(WeightError::ZeroDenominator(format!("{numer}/{denom}")));
        }
        Self::new(Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// `2^exp`, for any integer exponent.
    pub fn pow2(exp: i64) -> Self {
        Weight(pow2(exp))
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `⌊lg w⌋`.
    pub fn floor_log2(&self) -> i64 {
        let (p, q) = (self.0.numer(), self.0.denom());
        let k0 = bit_len(p) - bit_len(q);
        // p/q lies in (2^(k0-1), 2^(k0+1)).
        if cmp_scaled(p, q, k0) == Ordering::Less {
            k0 - 1
        } else {
            k0
        }
    }

    /// Largest power of two not exceeding the weight.
    pub fn floor_pow2(&self) -> Weight {
        Weight::pow2(self.floor_log2())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.0))
    }
}

impl FromStr for Weight {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Weight::new(parse_rational(s)?)
    }
}

impl Add for &Weight {
    type Output = Weight;

    fn add(self, rhs: &Weight) -> Weight {
        Weight(&self.0 + &rhs.0)
    }
}

/// Parses `<int>` or `<int>/<int>` (optional leading `-` on the numerator).
pub fn parse_rational(s: &str) -> Result<Rational, WeightError> {
    let malformed = || WeightError::Malformed(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let valid_int = |t: &str, allow_sign: bool| {
        let digits = if allow_sign { t.strip_prefix('-').unwrap_or(t) } else { t };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(n, true) {
        return Err(malformed());
    }
    let numer: BigInt = n.parse().map_err(|_| malformed())?;
    let denom: BigInt = match d {
        Some(d) => {
            if !valid_int(d, false) {
                return Err(malformed());
            }
            d.parse().map_err(|_| malformed())?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(WeightError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical `p` or `p/q` rendering of a reduced rational.
pub fn render(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering rounded half-up to `places` fractional digits.
pub fn to_decimal(value: &Rational, places: usize) -> String {
    let negative = value.is_negative();
    let abs = value.abs();
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = abs.numer() * &scale;
    let (q, r) = scaled.div_rem(abs.denom());
    let q = if r * 2 >= *abs.denom() { q + 1 } else { q };
    let digits = q.to_string();
    let digits =
        if digits.len() <= places { format!("{}{}", "0".repeat(places + 1 - digits.len()), digits) } else { digits };
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if negative && !(q_is_zero(&digits)) { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn q_is_zero(digits: &str) -> bool {
    digits.bytes().all(|b| b == b'0')
}

pub fn pow2(exp: i64) -> Rational {
    let shift = exp.unsigned_abs() as usize;
    let big = BigInt::one() << shift;
    if exp >= 0 {
        Rational::from_integer(big)
    } else {
        Rational::new(BigInt::one(), big)
    }
}

pub(crate) fn bit_len(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// Compares `p` against `q · 2^k` for positive integers.
pub(crate) fn cmp_scaled(p: &BigInt, q: &BigInt, k: i64) -> Ordering {
    debug_assert!(p.sign() == Sign::Plus && q.sign() == Sign::Plus);
    if k >= 0 {
        p.cmp(&(q << (k as usize)))
    } else {
        (p << ((-k) as usize)).cmp(q)
    }
}
