use super::{arg_rational, arity, floor_out, unknown};
use crate::model::{TokenId, Value};
use crate::rational::amount;
use crate::vm::{require, revert, Frame, Step};

pub(super) fn dispatch(
    f: &mut Frame<'_>,
    tin: &TokenId,
    tout: &TokenId,
    function: &str,
    args: &[Value],
) -> Step<Option<Value>> {
    match function {
        "getTokens" => {
            arity(args, 0)?;
            Ok(Some(Value::pair(Value::Token(tin.clone()), Value::Token(tout.clone()))))
        }
        "getRate" => {
            arity(args, 1)?;
            Ok(Some(f.get("rate")))
        }
        "setRate" => {
            arity(args, 1)?;
            let r = arg_rational(args, 0)?;
            require(f.get("owner").as_account() == Some(f.sender()), "sender == owner")?;
            f.set("rate", Value::Rat(r));
            Ok(None)
        }
        "swap" => {
            arity(args, 0)?;
            let x = f.paid_only(tin)?;
            let rate = match f.get("rate").as_rational() {
                Some(r) => r,
                None => return revert("rate unset"),
            };
            let y = floor_out(&(amount(x) * rate))?;
            require(f.balance(tout) >= y, "balance(tout) >= y")?;
            let to = f.sender().clone();
            f.transfer(&to, y, tout)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}
