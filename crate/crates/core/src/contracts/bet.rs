use super::{arg_rational, arity, floor_out, unknown};
use crate::model::{AccountId, TokenId, Value};
use crate::rational::{amount, Rational};
use crate::vm::{require, revert, Frame, Step};

pub(super) struct BetParams<'a> {
    pub oracle: &'a AccountId,
    pub native: &'a TokenId,
    pub deadline: u64,
    pub rate: &'a Rational,
    pub owner: &'a AccountId,
}

pub(super) fn dispatch(f: &mut Frame<'_>, bet: &BetParams<'_>, function: &str, args: &[Value]) -> Step<Option<Value>> {
    match function {
        "bet" => {
            arity(args, 1)?;
            let p = arg_rational(args, 0)?;
            let x = f.paid_only(bet.native)?;
            // The pot is compared before the payment was credited.
            let pot = f.balance(bet.native) - x;
            require(f.get("player") == Value::Null, "player == null")?;
            require(x == pot, "x == balance(ETH)")?;
            require(p >= Rational::from_integer(0) && p <= Rational::from_integer(1), "p >= 0 && p <= 1")?;
            f.set("potShare", Value::Rat(p));
            let sender = f.sender().clone();
            f.set("player", Value::Account(sender));
            Ok(None)
        }
        "win" => {
            arity(args, 0)?;
            require(f.block_number() <= bet.deadline, "block.num <= deadline")?;
            let player = f.get("player");
            require(player.as_account() == Some(f.sender()), "sender == player")?;
            let share = match f.get("potShare").as_rational() {
                Some(s) => s,
                None => return revert("potShare unset"),
            };
            let observed = match f.call(bet.oracle, "getRate", &[Value::Token(bet.native.clone())], Vec::new())? {
                Some(v) => v.as_rational(),
                None => None,
            };
            let observed = match observed {
                Some(r) => r,
                None => return revert("oracle returned no rate"),
            };
            if observed >= share * bet.rate {
                let payout = floor_out(&(share * amount(f.balance(bet.native))))?;
                let to = player.as_account().cloned().expect("checked above");
                f.transfer(&to, payout, bet.native)?;
                // A bet pays out once.
                f.set("potShare", Value::Rat(Rational::from_integer(0)));
            }
            Ok(None)
        }
        "close" => {
            arity(args, 0)?;
            require(f.block_number() > bet.deadline, "block.num > deadline")?;
            let all = f.balance(bet.native);
            f.transfer(bet.owner, all, bet.native)?;
            Ok(None)
        }
        _ => unknown(function),
    }
}
