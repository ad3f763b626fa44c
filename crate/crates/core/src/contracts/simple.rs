//! Airdrop, AirdropFee, FeeManager and Doubler.

use super::{arg_amount, arg_int, arity, floor_out, unknown};
use crate::model::{AccountId, TokenId, Value};
use crate::rational::{amount, frac};
use crate::vm::{require, revert, Frame, Step};

pub(super) fn airdrop(f: &mut Frame<'_>, token: &TokenId, function: &str, args: &[Value]) -> Step<Option<Value>> {
    match function {
        "fund" => {
            arity(args, 0)?;
            f.paid_only(token)?;
            Ok(None)
        }
        "withdraw" => {
            arity(args, 1)?;
            let x = arg_amount(args, 0)?;
            require(f.balance(token) >= x, "balance(T) >= x")?;
            let to = f.sender().clone();
            f.transfer(&to, x, token)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}

pub(super) fn fee_manager(f: &mut Frame<'_>, function: &str, args: &[Value]) -> Step<Option<Value>> {
    match function {
        "getOwner" => {
            arity(args, 0)?;
            Ok(Some(f.get("owner")))
        }
        "getFee" => {
            arity(args, 0)?;
            Ok(Some(f.get("feeRate")))
        }
        // No owner check: anyone may change the fee.
        "setFee" => {
            arity(args, 1)?;
            let r = arg_int(args, 0)?;
            require((0..=100).contains(&r), "r >= 0 && r <= 100")?;
            f.set("feeRate", Value::Int(r));
            Ok(None)
        }
        _ => unknown(function),
    }
}

pub(super) fn airdrop_fee(
    f: &mut Frame<'_>,
    token: &TokenId,
    fee_manager: &AccountId,
    function: &str,
    args: &[Value],
) -> Step<Option<Value>> {
    match function {
        "fund" => {
            arity(args, 0)?;
            f.paid_only(token)?;
            Ok(None)
        }
        "withdraw" => {
            arity(args, 1)?;
            let x = arg_amount(args, 0)?;
            require(f.balance(token) >= x, "balance(T) >= x")?;
            let rate = match f.call(fee_manager, "getFee", &[], Vec::new())?.and_then(|v| v.as_int()) {
                Some(r) => r,
                None => return revert("fee manager returned no fee"),
            };
            let fee = floor_out(&(frac(rate, 100) * amount(x)))?;
            if fee > x {
                return revert("fee exceeds amount");
            }
            let to = f.sender().clone();
            f.transfer(&to, x - fee, token)?;
            let owner = match f.call(fee_manager, "getOwner", &[], Vec::new())? {
                Some(Value::Account(a)) => a,
                _ => return revert("fee manager returned no owner"),
            };
            f.transfer(&owner, fee, token)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}

pub(super) fn doubler(f: &mut Frame<'_>, token: &TokenId, function: &str, args: &[Value]) -> Step<Option<Value>> {
    match function {
        "double" => {
            arity(args, 0)?;
            let n = f.paid_only(token)?;
            let out = n.checked_mul(2).ok_or_else(|| crate::vm::Abort::Revert("overflow".into()))?;
            require(f.balance(token) >= out, "balance(T) >= 2n")?;
            let to = f.sender().clone();
            f.transfer(&to, out, token)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}
