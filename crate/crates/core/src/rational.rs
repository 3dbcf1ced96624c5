//! Exact rational helpers on top of [`num_rational::BigRational`].
//!
//! Every share formula changes branch at a rational endpoint, so all
//! comparisons in the crate go through this type. Floats only appear at the
//! edges (rendering, the float experiment path).

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision fraction, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// `num / den` as a [`Rational`]. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_u64(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a decimal string (optionally with an
/// exponent). Decimals are read exactly, so `0.35` is `7/20`.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    let err = || Error::Parse {
        input: input.to_string(),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let all_digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err())?);
    let scale = exponent - frac.len() as i64;
    if scale.unsigned_abs() > 4096 {
        return Err(err());
    }
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= Rational::from_integer(pow);
    } else {
        value /= Rational::from_integer(pow);
    }
    Ok(if negative { -value } else { value })
}

/// Decimal rendering rounded half away from zero to `places` digits.
pub fn to_decimal(r: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.abs().round().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        return format!("{sign}{whole}");
    }
    format!(
        "{sign}{whole}.{:0>width$}",
        frac.to_string(),
        width = places
    )
}

/// `p/q`, or just `p` for integers.
pub fn to_fraction(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float (every finite f64 is a dyadic rational).
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `floor(r)` as a machine integer; `None` if negative or too large.
pub fn floor_u64(r: &Rational) -> Option<u64> {
    r.floor().to_integer().to_u64()
}

/// `ceil(r)` as a machine integer; `None` if negative or too large.
pub fn ceil_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

/// `ceil(1/alpha)` for `alpha > 0`: the smallest object count for which a
/// normalized vector can have largest entry `alpha`.
pub fn min_objects(alpha: &Rational) -> u64 {
    debug_assert!(alpha.is_positive());
    ceil_u64(&alpha.recip()).expect("1/alpha fits in u64")
}

pub(crate) fn is_nonnegative(r: &Rational) -> bool {
    r.numer().sign() != Sign::Minus
}

/// Least common multiple of the denominators.
pub(crate) fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
