//! Exact rational helpers. Everything numeric outside token balances goes
//! through [`Rational`]; there is no floating point in the crate.

use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::model::Amount;

pub type Rational = Ratio<i128>;

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn frac(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub fn amount(a: Amount) -> Rational {
    Rational::from_integer(a as i128)
}

/// Floor toward negative infinity, returning `None` for negative results or
/// values that do not fit a token amount.
pub fn floor_amount(r: &Rational) -> Option<Amount> {
    let f = r.floor().to_integer();
    if f < 0 {
        None
    } else {
        f.to_u64()
    }
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::from_integer(1);
    for _ in 0..exp {
        acc *= *base;
    }
    acc
}

/// Renders `p/q`, or `p` for integers.
pub fn render(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `places` digits, rounded half away from zero.
pub fn render_decimal(r: &Rational, places: u32) -> String {
    let scale = 10i128.pow(places);
    let scaled = *r * Rational::from_integer(scale);
    let magnitude = scaled.abs();
    let mut units = magnitude.trunc().to_integer();
    if magnitude.fract() * Rational::from_integer(2) >= Rational::from_integer(1) {
        units += 1;
    }
    let sign = if r.is_negative() && units != 0 { "-" } else { "" };
    let (whole, part) = units.div_rem(&scale);
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{part:0width$}", width = places as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseRationalError(pub String);

/// Accepts `p`, `p/q` and finite decimals such as `1.5`.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = i128::from_str(n.trim()).map_err(|_| err())?;
        let d = i128::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((w, f)) = t.split_once('.') {
        if f.is_empty() || !f.chars().all(|c| c.is_ascii_digit()) || f.len() > 30 {
            return Err(err());
        }
        let negative = w.starts_with('-');
        let w = i128::from_str(if w.is_empty() || w == "-" { "0" } else { w }).map_err(|_| err())?;
        let scale = 10i128.pow(f.len() as u32);
        let f = i128::from_str(f).map_err(|_| err())?;
        let body = w.abs() * scale + f;
        return Ok(Rational::new(if negative { -body } else { body }, scale));
    }
    i128::from_str(t).map(Rational::from_integer).map_err(|_| err())
}

/// All fractions k/d with 0 ≤ k/d ≤ 1 and d ≤ order, ascending.
pub fn farey(order: u64) -> Vec<Rational> {
    let order = order.max(1) as i128;
    let mut out: Vec<Rational> = Vec::new();
    for d in 1..=order {
        for k in 0..=d {
            out.push(Rational::new(k, d));
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(render_decimal(&frac(3, 5), 6), "0.600000");
        assert_eq!(render_decimal(&frac(-1, 3), 4), "-0.3333");
        assert_eq!(render_decimal(&frac(2, 3), 2), "0.67");
        assert_eq!(render_decimal(&int(7), 0), "7");
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse("1.5").unwrap(), frac(3, 2));
        assert_eq!(parse("-0.25").unwrap(), frac(-1, 4));
        assert_eq!(parse("4").unwrap(), int(4));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn farey_order_three() {
        let f = farey(3);
        let expect = [frac(0, 1), frac(1, 3), frac(1, 2), frac(2, 3), frac(1, 1)];
        assert_eq!(f, expect);
    }

    #[test]
    fn floor_rejects_negative() {
        assert_eq!(floor_amount(&frac(-1, 2)), None);
        assert_eq!(floor_amount(&frac(7, 2)), Some(3));
    }
}
