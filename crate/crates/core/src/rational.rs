//! Exact rational values. Every Hurwitz number in this crate is a
//! [`Rational`]; nothing outside `trflow` touches floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_u128(n: u128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        Pow::pow(base, exp as u64)
    } else {
        Pow::pow(base.recip(), exp.unsigned_abs())
    }
}

pub fn pow_int(base: i64, exp: i64) -> Rational {
    pow(&int(base), exp)
}

/// `"p/q"` in lowest terms with `q > 0`, including integers (`"108/1"`).
pub fn to_ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Integers bare, everything else as `p/q`.
pub fn to_pretty_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        to_ratio_string(r)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn is_positive_integer(r: &Rational) -> bool {
    r.is_integer() && r.is_positive()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_integers_with_unit_denominator() {
        assert_eq!(to_ratio_string(&int(108)), "108/1");
        assert_eq!(to_ratio_string(&int(-6)), "-6/1");
        assert_eq!(to_ratio_string(&frac(4, -6)), "-2/3");
        assert_eq!(to_pretty_string(&int(108)), "108");
        assert_eq!(to_pretty_string(&frac(1, 24)), "1/24");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["2/3", "-6/1", "1/24", "0/1"] {
            assert_eq!(to_ratio_string(&parse_rational(s).unwrap()), s);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn negative_powers() {
        assert_eq!(pow_int(3, -2), frac(1, 9));
        assert_eq!(pow_int(6, 0), int(1));
        assert_eq!(pow(&frac(-1, 2), 3), frac(-1, 8));
    }
}
