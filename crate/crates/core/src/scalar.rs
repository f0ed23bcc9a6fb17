//! Exact rational scalars.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// The coefficient field: arbitrary-precision rationals.
pub type Q = BigRational;

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "p", "p/q" or "-p/q" (ASCII minus) into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Q::new(num, den))
}

/// Renders a rational as "p" or "p/q".
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Renders a rational as a leading factor of a monomial: "", "-", "3*", "-1/2*".
pub fn fmt_q_factor(x: &Q) -> String {
    if x.is_one() {
        String::new()
    } else if (-x.clone()).is_one() {
        "-".to_string()
    } else {
        format!("{}*", fmt_q(x))
    }
}

/// True if `x` is a negative rational.
pub fn is_negative(x: &Q) -> bool {
    x.is_negative()
}
