//! Closed-form real-arithmetic MEV formulas for the Exchange, Bet and LP
//! examples, evaluated exactly over rationals.

use std::fmt;

use num_traits::Zero;

use crate::rational::{frac, int, pow, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormResult {
    pub value: Rational,
    /// Which branch of the piecewise definition was taken.
    pub case: &'static str,
    /// True when the formula bounds integer search results from above rather
    /// than predicting them exactly.
    pub is_upper_bound: bool,
    pub note: Option<String>,
}

impl ClosedFormResult {
    pub fn exact(value: Rational, case: &'static str) -> Self {
        ClosedFormResult { value, case, is_upper_bound: false, note: None }
    }

    pub fn bound(value: Rational, case: &'static str) -> Self {
        ClosedFormResult { value, case, is_upper_bound: true, note: None }
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for ClosedFormResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}{}]", crate::rational::render(&self.value), self.case, if self.is_upper_bound { ", bound" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must not be negative")]
    Negative(&'static str),
    #[error("fee rate {0} outside 0..=100")]
    FeeRate(i128),
}

fn positive(v: &Rational, name: &'static str) -> Result<(), OracleError> {
    if *v > int(0) {
        Ok(())
    } else {
        Err(OracleError::NonPositive(name))
    }
}

fn non_negative(v: &Rational, name: &'static str) -> Result<(), OracleError> {
    if *v >= int(0) {
        Ok(())
    } else {
        Err(OracleError::Negative(name))
    }
}

/// Airdrop/Exchange with unit prices: `(unrestricted, restricted)`.
///
/// `n_m` is the adversary's balance of the input token, `n_a` the airdrop's,
/// `n_e` the exchange's output reserve and `rate` the exchange rate.
pub fn exchange_mev(
    n_m: Rational,
    n_a: Rational,
    n_e: Rational,
    rate: Rational,
) -> Result<(ClosedFormResult, ClosedFormResult), OracleError> {
    non_negative(&n_m, "n_M")?;
    non_negative(&n_a, "n_A")?;
    non_negative(&n_e, "n_E")?;
    positive(&rate, "rate")?;
    let restricted = if n_m < n_e / rate {
        ClosedFormResult::exact(n_m * rate, "n_M < n_E/r")
    } else {
        ClosedFormResult::exact(n_e, "otherwise")
    };
    let unrestricted = if n_m < n_e / rate - n_a {
        ClosedFormResult::exact((n_m + n_a) * rate, "n_M < n_E/r - n_A")
    } else {
        ClosedFormResult::exact(n_e, "otherwise")
    };
    Ok((unrestricted, restricted))
}

pub fn exchange_interference(
    n_m: Rational,
    n_a: Rational,
    n_e: Rational,
    rate: Rational,
) -> Result<ClosedFormResult, OracleError> {
    exchange_mev(n_m, n_a, n_e, rate)?;
    Ok(if n_m < n_e / rate - n_a {
        let v = if (n_m + n_a).is_zero() { int(0) } else { n_a / (n_m + n_a) };
        ClosedFormResult::exact(v, "n_M < n_E/r - n_A")
    } else if n_m < n_e / rate {
        ClosedFormResult::exact(int(1) - n_m * rate / n_e, "n_E/r - n_A <= n_M < n_E/r")
    } else {
        ClosedFormResult::exact(int(0), "otherwise")
    })
}

/// Upper bound on what a bet attack backed by an AMM swap can take from the
/// pot: `m` native units held, pot `b`, AMM reserves `r0` native and `r1`
/// token, bet rate `rate`.
pub fn bet_mev_unrestricted_bound(
    m: Rational,
    b: Rational,
    r0: Rational,
    r1: Rational,
    rate: Rational,
) -> Result<ClosedFormResult, OracleError> {
    non_negative(&b, "b")?;
    positive(&r0, "r0")?;
    positive(&r1, "r1")?;
    positive(&rate, "rate")?;
    if m < b {
        return Err(OracleError::Negative("m - b"));
    }
    let s = r0 + m - b;
    let v = (int(2) * s * s / (rate * r0 * r1) - int(1)) * b;
    Ok(ClosedFormResult::bound(v, "m >= b"))
}

/// Loss from entering the bet without touching the oracle, with `p` capped
/// at 1 as the bet contract requires.
pub fn bet_mev_restricted(b: Rational, r0: Rational, r1: Rational, rate: Rational) -> Result<ClosedFormResult, OracleError> {
    non_negative(&b, "b")?;
    positive(&r0, "r0")?;
    positive(&r1, "r1")?;
    positive(&rate, "rate")?;
    let ratio = r0 / (rate * r1);
    let share = ratio.min(int(1));
    if share < frac(1, 2) {
        return Ok(ClosedFormResult::exact(int(0), "r0/(r r1) < 1/2"));
    }
    let v = (int(2) * b * share).floor() - b;
    let res = ClosedFormResult::exact(v, "r0/(r r1) >= 1/2");
    Ok(if ratio > int(1) { res.noted("share capped at 1") } else { res })
}

/// Swap amount that maximises the borrowable amount in the LP attack.
pub fn lp_optimal_x(n: Rational, r: Rational) -> Result<Rational, OracleError> {
    non_negative(&n, "n")?;
    positive(&r, "r")?;
    Ok(if int(4) * n >= r { (int(4) * n - r) / int(5) } else { int(0) })
}

/// Borrowable amount after swapping `x` of the `n` native units into a
/// balanced AMM with reserves `r`, depositing the rest.
pub fn lp_borrowable(n: Rational, r: Rational, cmin: Rational, x: Rational) -> Result<Rational, OracleError> {
    positive(&r, "r")?;
    positive(&cmin, "cmin")?;
    Ok((n - x) * pow(&(r + x), 4) / (cmin * pow(&r, 4)))
}

/// `(unrestricted, restricted)` LP losses. The restricted branch is the
/// literal formula; it is negative whenever `cmin > 1`.
pub fn lp_mev(n: Rational, r: Rational, cmin: Rational) -> Result<(ClosedFormResult, ClosedFormResult), OracleError> {
    non_negative(&n, "n")?;
    positive(&r, "r")?;
    positive(&cmin, "cmin")?;
    let restricted_value = n * (int(1) / cmin - int(1));
    let restricted = ClosedFormResult::exact(restricted_value, "deposit all");
    let restricted = if restricted_value < int(0) {
        restricted.noted("negative: borrowing at cmin > 1 never pays, true loss is 0")
    } else {
        restricted
    };
    let unrestricted = if int(4) * n >= r {
        let k = int(4) * (n + r) / (int(5) * r);
        ClosedFormResult::bound((n + r) / int(5) * (pow(&k, 4) / cmin - int(1)), "4n >= r")
    } else {
        ClosedFormResult::bound(restricted_value, "otherwise")
    };
    Ok((unrestricted, restricted))
}

pub fn lp_interference(n: Rational, r: Rational, cmin: Rational) -> Result<ClosedFormResult, OracleError> {
    lp_mev(n, r, cmin)?;
    if int(4) * n >= r {
        let s = n + r;
        let num = int(3125) * pow(&r, 4) * n * (int(1) - cmin);
        let den = s * (int(256) * pow(&s, 4) - pow(&(int(5) * r), 4) * cmin);
        if den.is_zero() {
            return Ok(ClosedFormResult::exact(int(0), "4n >= r").noted("unrestricted value is zero"));
        }
        let v = int(1) - num / den;
        let res = ClosedFormResult::exact(v, "4n >= r");
        Ok(if v > int(1) { res.noted("exceeds 1 because the restricted value is negative") } else { res })
    } else {
        Ok(ClosedFormResult::exact(int(0), "otherwise"))
    }
}

/// Interference of a fee manager on a fee-charging airdrop holding `n`
/// tokens at fee rate `fee_rate` percent.
pub fn fee_interference(n: u64, fee_rate: i128) -> Result<Rational, OracleError> {
    if !(0..=100).contains(&fee_rate) {
        return Err(OracleError::FeeRate(fee_rate));
    }
    if n == 0 {
        return Ok(int(0));
    }
    let n = n as i128;
    let fee = (fee_rate * n).div_euclid(100);
    let v = int(1) - frac(n - fee, n);
    debug_assert!(v <= frac(fee_rate, 100));
    Ok(v)
}
