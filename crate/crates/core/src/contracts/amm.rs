//! Constant-product AMM over a token pair.

use super::{arg_amount, arg_token, arity, floor_out, unknown};
use crate::model::{TokenId, Value};
use crate::rational::{amount, Rational};
use crate::vm::{require, revert, Frame, Step};

fn rate(f: &Frame<'_>, t0: &TokenId, t1: &TokenId, tout: &TokenId) -> Step<Rational> {
    let tin = if tout == t0 { t1 } else { t0 };
    let denom = f.balance(tin);
    if denom == 0 {
        return revert(format!("division by zero: balance({tin}) = 0"));
    }
    Ok(Rational::new(f.balance(tout) as i128, denom as i128))
}

pub(super) fn dispatch(
    f: &mut Frame<'_>,
    t0: &TokenId,
    t1: &TokenId,
    function: &str,
    args: &[Value],
) -> Step<Option<Value>> {
    match function {
        "getTokens" => {
            arity(args, 0)?;
            Ok(Some(Value::pair(Value::Token(t0.clone()), Value::Token(t1.clone()))))
        }
        "getRate" => {
            arity(args, 1)?;
            let tout = arg_token(args, 0)?;
            Ok(Some(Value::Rat(rate(f, t0, t1, &tout)?)))
        }
        "swap" => {
            arity(args, 1)?;
            let ymin = arg_amount(args, 0)?;
            let tin = match f.ctx.payments.first() {
                Some(p) => p.token.clone(),
                None => return revert("swap requires a payment"),
            };
            if &tin != t0 && &tin != t1 {
                return revert(format!("{tin} is not traded here"));
            }
            let tout = if &tin == t0 { t1.clone() } else { t0.clone() };
            let x = f.paid_only(&tin)?;
            // Reserves already include the payment.
            let y = floor_out(&(amount(x) * rate(f, t0, t1, &tout)?))?;
            require(ymin <= y && y < f.balance(&tout), "ymin <= y && y < balance(tout)")?;
            let to = f.sender().clone();
            f.transfer(&to, y, &tout)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}
