//! Exact rational helpers on top of `num::BigRational`.
//!
//! Everything that has to be compared exactly (atom positions, masses,
//! monodromy values) is a [`Rational`]. Floating values only ever appear as
//! approximations derived from these.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num::BigRational;

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num::pow(base.clone(), exp as usize)
}

pub fn pow3_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), num::pow(BigInt::from(3), k as usize))
}

pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

/// Exact value of a finite double.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite coordinate {x}")))
}

pub fn to_f64(x: &Rational) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // huge numerator/denominator: scale down before converting
            let n = x.numer().bits() as i64;
            let d = x.denom().bits() as i64;
            let shift = (n.max(d) - 900).max(0) as usize;
            let num = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let den = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            num / den
        }
    }
}

/// Formats as `"p/q"`, always with an explicit denominator.
pub fn fmt_ratio(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.25"`.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').ok_or_else(bad)?;
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num::pow(BigInt::from(10), fp.len());
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

/// Largest `k` with `2^k` dividing the denominator exactly, or `None` when
/// the denominator has another prime factor.
pub fn dyadic_exponent(x: &Rational) -> Option<u64> {
    let mut d = x.denom().clone();
    let mut k = 0;
    let two = BigInt::from(2);
    while (&d % &two).is_zero() {
        d /= &two;
        k += 1;
    }
    if d.is_one() {
        Some(k)
    } else {
        None
    }
}

/// Greatest common divisor of two rationals: the positive generator of the
/// additive group `a Z + b Z`.
pub fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    use num::Integer;
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let n = a.numer().gcd(b.numer());
    let d = a.denom().lcm(b.denom());
    Rational::new(n, d)
}

/// `x mod g` in the half-open domain `[0, g)`, for `g > 0`.
pub fn modulo(x: &Rational, g: &Rational) -> Rational {
    let q = (x / g).floor();
    x - q * g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_with_denominator() {
        assert_eq!(fmt_ratio(&int(1)), "1/1");
        assert_eq!(fmt_ratio(&ratio(-3, 6)), "-1/2");
    }

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_ratio("7/2").unwrap(), ratio(7, 2));
        assert_eq!(parse_ratio(" -4 ").unwrap(), int(-4));
        assert_eq!(parse_ratio("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_ratio(".5").unwrap(), ratio(1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio("1.2.3").is_err());
    }

    #[test]
    fn dyadic_detection() {
        assert_eq!(dyadic_exponent(&ratio(3, 4)), Some(2));
        assert_eq!(dyadic_exponent(&int(5)), Some(0));
        assert_eq!(dyadic_exponent(&ratio(1, 3)), None);
    }

    #[test]
    fn gcd_and_modulo() {
        assert_eq!(rational_gcd(&ratio(3, 4), &ratio(1, 6)), ratio(1, 12));
        assert_eq!(modulo(&ratio(-1, 3), &ratio(1, 4)), ratio(1, 6));
        assert_eq!(modulo(&ratio(1, 2), &ratio(1, 4)), int(0));
    }

    #[test]
    fn huge_values_convert() {
        let tiny = pow3_inv(800);
        let v = to_f64(&tiny);
        assert!(v >= 0.0 && v < 1e-300);
        assert_eq!(to_f64(&ratio(1, 3)), 1.0 / 3.0);
    }
}
