//! Exact rational arithmetic helpers.
//!
//! Every quantity in the core (means, bounds, fractional parts, variances)
//! is a [`Rational`]. Floats appear only when rendering or when an
//! approximate oracle needs them. Decimal literals such as `"0.1"` parse to
//! their exact value (`1/10`), never through binary floating point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `numer / denom`. Panics if `denom == 0`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn from_usize(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `r - floor(r)`, always in `[0, 1)`.
pub fn frac_part(r: &Rational) -> Rational {
    r - r.floor()
}

/// Floor as a machine integer. Panics if it does not fit in `i64`.
pub fn floor_i64(r: &Rational) -> i64 {
    r.floor()
        .to_integer()
        .to_i64()
        .expect("floor does not fit in i64")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float. Returns `None` for NaN or infinities.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Exact square root if `r` is the square of a rational.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

fn pow10(exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), exp as usize)
}

fn pow10_rational(exp: i64) -> Rational {
    if exp >= 0 {
        Rational::from_integer(pow10(exp as u32))
    } else {
        Rational::new(BigInt::one(), pow10((-exp) as u32))
    }
}

/// A parsed numeric literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub value: Rational,
    /// Digits after the decimal point implied by the literal, accounting for
    /// any exponent. `None` for `p/q` fractions, which are exact by nature.
    pub decimals: Option<u32>,
}

/// Parses a decimal (`-1.25`, `.5`, `3.`, `2.5e-3`) or a fraction (`7/3`).
pub fn parse_literal(s: &str) -> Result<Literal> {
    let t = s.trim();
    let err = |reason: &str| Error::Parse {
        literal: s.to_string(),
        reason: reason.to_string(),
    };
    if t.is_empty() {
        return Err(err("empty"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Literal {
            value: Rational::new(p, q),
            decimals: None,
        });
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_digits) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_digits.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.bytes().chain(frac_digits.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err("unexpected character"));
    }
    if exponent.abs() > 10_000 {
        return Err(err("exponent out of range"));
    }
    let all: BigInt = format!("0{int_part}{frac_digits}")
        .parse()
        .map_err(|_| err("bad digits"))?;
    let scale = exponent - frac_digits.len() as i64;
    let mut value = Rational::from_integer(all) * pow10_rational(scale);
    if negative {
        value = -value;
    }
    Ok(Literal {
        value,
        decimals: Some((-scale).max(0) as u32),
    })
}

/// Parses a literal and discards precision information.
pub fn parse_rational(s: &str) -> Result<Rational> {
    parse_literal(s).map(|l| l.value)
}

/// Rounds to `places` decimals, ties away from zero.
pub fn round_to_places(r: &Rational, places: u32) -> Rational {
    let scale = Rational::from_integer(pow10(places));
    let scaled = r * &scale;
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled + half).floor())
    } else {
        (scaled + half).floor()
    };
    rounded / scale
}

/// Fixed-point rendering with exactly `places` decimals (ties away from zero).
pub fn to_fixed(r: &Rational, places: u32) -> String {
    let rounded = round_to_places(r, places) * Rational::from_integer(pow10(places));
    let digits = rounded.to_integer();
    let negative = digits.is_negative();
    let mut s = digits.abs().to_string();
    if places > 0 {
        let p = places as usize;
        if s.len() <= p {
            s = "0".repeat(p + 1 - s.len()) + &s;
        }
        s.insert(s.len() - p, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

/// `floor(log10(|r|))` for nonzero `r`.
fn decimal_exponent(r: &Rational) -> i64 {
    let a = r.abs();
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    while pow10_rational(e) > a {
        e -= 1;
    }
    while pow10_rational(e + 1) <= a {
        e += 1;
    }
    e
}

/// Significant digits used for decimal output.
pub const DISPLAY_SIGNIFICANT: i64 = 12;

/// Decimal rendering used for all human and machine output.
///
/// At least [`DISPLAY_SIGNIFICANT`] significant digits and never fewer than
/// 12 decimals, so the printed value re-parses within `1e-12` of the exact
/// value. Trailing zeros are trimmed.
pub fn to_decimal(r: &Rational) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let e = decimal_exponent(r);
    let places = (DISPLAY_SIGNIFICANT - 1 - e).max(12) as u32;
    let mut s = to_fixed(r, places);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// `"p/q"`, or just `"p"` for integers.
pub fn to_ratio_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Closed rational interval `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lower: Rational,
    pub upper: Rational,
}

impl Interval {
    /// Returns `None` when `lower > upper`.
    pub fn new(lower: Rational, upper: Rational) -> Option<Self> {
        (lower <= upper).then_some(Self { lower, upper })
    }

    pub fn point(v: Rational) -> Self {
        Self {
            lower: v.clone(),
            upper: v,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = std::cmp::max(&self.lower, &other.lower).clone();
        let upper = std::cmp::min(&self.upper, &other.upper).clone();
        Interval::new(lower, upper)
    }

    pub fn scale(&self, factor: &Rational) -> Interval {
        let (a, b) = (&self.lower * factor, &self.upper * factor);
        match a.cmp(&b) {
            Ordering::Greater => Interval { lower: b, upper: a },
            _ => Interval { lower: a, upper: b },
        }
    }

    /// Image under `x -> x^2`.
    pub fn square(&self) -> Interval {
        let lo2 = &self.lower * &self.lower;
        let hi2 = &self.upper * &self.upper;
        let upper = std::cmp::max(&lo2, &hi2).clone();
        let lower = if self.contains(&Rational::zero()) {
            Rational::zero()
        } else {
            std::cmp::min(lo2, hi2)
        };
        Interval { lower, upper }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", to_decimal(&self.lower), to_decimal(&self.upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_part_examples() {
        assert_eq!(frac_part(&(int(5) * ratio(1, 10))), ratio(1, 2));
        assert_eq!(frac_part(&int(3)), int(0));
        assert_eq!(frac_part(&ratio(7, 3)), ratio(1, 3));
        assert_eq!(frac_part(&ratio(-1, 3)), ratio(2, 3));
    }

    #[test]
    fn parses_decimals_exactly() {
        let l = parse_literal("0.1").unwrap();
        assert_eq!(l.value, ratio(1, 10));
        assert_eq!(l.decimals, Some(1));
        let l = parse_literal("0.10").unwrap();
        assert_eq!(l.value, ratio(1, 10));
        assert_eq!(l.decimals, Some(2));
        assert_eq!(parse_literal("-2.5").unwrap().value, ratio(-5, 2));
        assert_eq!(parse_literal(".5").unwrap().value, ratio(1, 2));
        assert_eq!(parse_literal("3.").unwrap().decimals, Some(0));
        assert_eq!(parse_literal("+7").unwrap().value, int(7));
    }

    #[test]
    fn parses_scientific_and_fractions() {
        let l = parse_literal("1.5e-3").unwrap();
        assert_eq!(l.value, ratio(3, 2000));
        assert_eq!(l.decimals, Some(4));
        let l = parse_literal("2.5E2").unwrap();
        assert_eq!(l.value, int(250));
        assert_eq!(l.decimals, Some(0));
        let l = parse_literal("14/5").unwrap();
        assert_eq!(l.value, ratio(14, 5));
        assert_eq!(l.decimals, None);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1.2.3", "1e", "-", ".", "1/0", "0x10", "1,5", "nan"] {
            assert!(parse_literal(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn fixed_rendering_rounds_half_away() {
        assert_eq!(to_fixed(&ratio(1, 8), 2), "0.13");
        assert_eq!(to_fixed(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(to_fixed(&ratio(1, 25), 3), "0.040");
        assert_eq!(to_fixed(&int(12), 0), "12");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 25)), "0.04");
        assert_eq!(to_decimal(&ratio(1, 6)), "0.166666666667");
        assert_eq!(to_decimal(&ratio(441, 10000)), "0.0441");
        assert_eq!(to_decimal(&ratio(64, 25)), "2.56");
        assert_eq!(to_decimal(&int(0)), "0");
        assert_eq!(to_decimal(&ratio(-1, 3)), "-0.333333333333");
    }

    #[test]
    fn exact_sqrt_detects_squares() {
        assert_eq!(exact_sqrt(&ratio(1, 25)), Some(ratio(1, 5)));
        assert_eq!(exact_sqrt(&ratio(1, 2)), None);
        assert_eq!(exact_sqrt(&int(-4)), None);
    }

    #[test]
    fn interval_square_straddling_zero() {
        let w = Interval::new(ratio(-1, 200), ratio(1, 200)).unwrap();
        assert_eq!(w.square(), Interval::new(int(0), ratio(1, 40000)).unwrap());
        let w = Interval::new(ratio(9, 40), ratio(47, 200)).unwrap();
        assert_eq!(w.square().lower, ratio(81, 1600));
    }
}
