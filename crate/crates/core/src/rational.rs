//! Exact rational scalars and their text forms.
//!
//! Every expectation, probability and bound in the crate is a [`Rational`].
//! Text input accepts `p/q` fractions and decimal literals; decimals are read
//! as exact decimal fractions (`"0.7071"` is `7071/10000`), never through a
//! binary float.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Largest decimal exponent accepted by [`parse_rational`].
const MAX_EXPONENT: i64 = 1000;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::domain("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num.trim(), true)?;
        let den = parse_integer(den.trim(), false)?;
        if den.is_zero() {
            return Err(Error::domain(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s)
}

fn parse_integer(s: &str, signed: bool) -> Result<BigInt> {
    let digits = match s.as_bytes().first() {
        Some(b'-' | b'+') if signed => &s[1..],
        _ => s,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::domain(format!("not an integer: {s:?}")));
    }
    s.parse::<BigInt>()
        .map_err(|e| Error::domain(format!("not an integer: {s:?} ({e})")))
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::domain(format!("not a decimal or p/q number: {s:?}"));
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp_text = &body[pos + 1..];
            let exp_digits = exp_text.strip_prefix(['+', '-']).unwrap_or(exp_text);
            if exp_digits.is_empty() || !exp_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let exp: i64 = exp_text.parse().map_err(|_| bad())?;
            if exp.abs() > MAX_EXPONENT {
                return Err(Error::domain(format!("exponent out of range in {s:?}")));
            }
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (whole, fraction) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(bad());
    }
    if !whole
        .bytes()
        .chain(fraction.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{whole}{fraction}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exponent - fraction.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Canonical `p/q` form; integers keep the `/1`.
pub fn to_fraction_string(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Positional decimal rounded to `sig` significant digits (half away from
/// zero), trailing zeros trimmed.
pub fn to_decimal_string(value: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if value.is_zero() {
        return "0".to_owned();
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let ten = BigInt::from(10);

    // exponent e with 10^e <= abs < 10^(e+1)
    let mut e = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }

    let scaled = &abs * pow10(sig as i64 - 1 - e);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if r * 2 >= *scaled.denom() { q + 1 } else { q };
    if digits == num_traits::pow(ten.clone(), sig) {
        digits /= &ten;
        e += 1;
    }
    let digits = digits.to_str_radix(10);

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let sig = sig as i64;
    if e >= sig - 1 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (e - sig + 1) as usize));
        return out;
    }
    let mut body = if e < 0 {
        let mut b = "0.".to_owned();
        b.extend(std::iter::repeat_n('0', (-e - 1) as usize));
        b.push_str(&digits);
        b
    } else {
        let split = (e + 1) as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    };
    while body.ends_with('0') {
        body.pop();
    }
    if body.ends_with('.') {
        body.pop();
    }
    out.push_str(&body);
    out
}
