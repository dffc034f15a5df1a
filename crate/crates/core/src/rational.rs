//! Exact rational numbers used for edge lengths, offsets and circle coordinates.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rational = num_rational::Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Representative of `x` modulo 1 in `[0, 1)`.
pub fn frac(x: Rational) -> Rational {
    x - x.floor()
}

pub fn is_integer(x: &Rational) -> bool {
    x.denom().is_one()
}

/// Least common multiple of the denominators of `xs`.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> i64 {
    xs.into_iter().fold(1i64, |acc, x| acc.lcm(x.denom()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `a/b` or `a`, with an optional leading minus sign.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = num.parse().map_err(|_| err())?;
    let d: i64 = den.parse().map_err(|_| err())?;
    if d <= 0 {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Formats as `a/b`, or `a` when the denominator is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn abs(x: Rational) -> Rational {
    x.abs()
}

pub fn zero() -> Rational {
    Rational::zero()
}
