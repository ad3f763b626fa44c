//! Simplified lending pool: deposits are collateral valued at oracle rates,
//! borrowing requires the collateral ratio to stay at or above `cmin`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{arg_account, arg_amount, arg_token, arity, unknown, ContractKind};
use crate::model::{AccountId, Amount, BlockchainState, TokenId, Value};
use crate::rational::{amount, floor_amount, Rational};
use crate::vm::{self, require, revert, Frame, Step};

fn entry(book: &Value, token: &TokenId, who: &AccountId) -> Amount {
    book.as_map()
        .and_then(|m| m.get(&Value::Token(token.clone())))
        .and_then(Value::as_map)
        .and_then(|m| m.get(&Value::Account(who.clone())))
        .and_then(Value::as_amount)
        .unwrap_or(0)
}

fn with_entry(book: &Value, token: &TokenId, who: &AccountId, value: Amount) -> Value {
    let mut outer = book.as_map().cloned().unwrap_or_default();
    let key = Value::Token(token.clone());
    let mut inner = outer.get(&key).and_then(Value::as_map).cloned().unwrap_or_default();
    if value == 0 {
        inner.remove(&Value::Account(who.clone()));
    } else {
        inner.insert(Value::Account(who.clone()), Value::amount(value));
    }
    if inner.is_empty() {
        outer.remove(&key);
    } else {
        outer.insert(key, Value::Map(inner));
    }
    Value::Map(outer)
}

fn tokens_of(book: &Value, who: &AccountId, out: &mut BTreeSet<TokenId>) {
    if let Some(m) = book.as_map() {
        for (t, inner) in m {
            let held = inner.as_map().map(|i| i.contains_key(&Value::Account(who.clone()))).unwrap_or(false);
            if let (true, Some(t)) = (held, t.as_token()) {
                out.insert(t.clone());
            }
        }
    }
}

/// Oracle-weighted sums of a user's deposits and debts.
struct Position {
    minted: Rational,
    debts: Rational,
}

impl Position {
    /// `None` stands for an unbounded ratio (no debts).
    fn ratio(&self) -> Option<Rational> {
        if self.debts.is_zero() {
            None
        } else {
            Some(self.minted / self.debts)
        }
    }
}

fn position(f: &mut Frame<'_>, oracle: &AccountId, who: &AccountId) -> Step<Position> {
    let minted = f.get("minted");
    let debts = f.get("debts");
    let mut tokens = BTreeSet::new();
    tokens_of(&minted, who, &mut tokens);
    tokens_of(&debts, who, &mut tokens);
    let mut pos = Position { minted: Rational::zero(), debts: Rational::zero() };
    for t in tokens {
        let rate = match f.call(oracle, "getRate", &[Value::Token(t.clone())], Vec::new())? {
            Some(v) => v.as_rational(),
            None => None,
        };
        let rate = match rate {
            Some(r) => r,
            None => return revert("oracle returned no rate"),
        };
        pos.minted += amount(entry(&minted, &t, who)) * rate;
        pos.debts += amount(entry(&debts, &t, who)) * rate;
    }
    Ok(pos)
}

pub(super) fn dispatch(
    f: &mut Frame<'_>,
    oracle: &AccountId,
    cmin: &Rational,
    function: &str,
    args: &[Value],
) -> Step<Option<Value>> {
    match function {
        "deposit" => {
            arity(args, 0)?;
            let token = match f.ctx.payments.first() {
                Some(p) => p.token.clone(),
                None => return revert("deposit requires a payment"),
            };
            let x = f.paid_only(&token)?;
            let who = f.sender().clone();
            let minted = f.get("minted");
            let next = entry(&minted, &token, &who) + x;
            f.set("minted", with_entry(&minted, &token, &who, next));
            Ok(None)
        }
        "borrow" => {
            arity(args, 2)?;
            let x = arg_amount(args, 0)?;
            let token = arg_token(args, 1)?;
            let who = f.sender().clone();
            require(f.balance(&token) >= x, "balance(t) >= x")?;
            let debts = f.get("debts");
            let next = entry(&debts, &token, &who) + x;
            f.set("debts", with_entry(&debts, &token, &who, next));
            let ratio = position(f, oracle, &who)?.ratio();
            require(ratio.map(|r| r >= *cmin).unwrap_or(true), "collateral(a) >= Cmin")?;
            f.transfer(&who, x, &token)?;
            Ok(None)
        }
        "collateral" => {
            arity(args, 1)?;
            let who = arg_account(args, 0)?;
            Ok(Some(position(f, oracle, &who)?.ratio().map(Value::Rat).unwrap_or(Value::Null)))
        }
        _ => unknown(function),
    }
}

/// Largest amount of `token` that `who` could borrow from `lp` in `state`
/// without breaking the collateral guard, capped by the pool's balance.
/// Used to place heuristic candidates on the guard boundary.
pub fn max_borrow(state: &BlockchainState, lp: &AccountId, who: &AccountId, token: &TokenId) -> Option<Amount> {
    let inst = state.contract(lp)?;
    let (oracle, cmin) = match inst.kind.as_ref() {
        ContractKind::Lp { oracle, cmin } => (oracle, cmin),
        _ => return None,
    };
    let minted = inst.get("minted").cloned().unwrap_or(Value::Null);
    let debts = inst.get("debts").cloned().unwrap_or(Value::Null);
    let mut tokens = BTreeSet::new();
    tokens_of(&minted, who, &mut tokens);
    tokens_of(&debts, who, &mut tokens);
    tokens.insert(token.clone());
    let mut rates: BTreeMap<TokenId, Rational> = BTreeMap::new();
    for t in &tokens {
        let r = vm::view(state, lp, oracle, "getRate", &[Value::Token(t.clone())]).ok()??;
        rates.insert(t.clone(), r.as_rational()?);
    }
    let mut m = Rational::zero();
    let mut d = Rational::zero();
    for t in &tokens {
        m += amount(entry(&minted, t, who)) * rates[t];
        d += amount(entry(&debts, t, who)) * rates[t];
    }
    let balance = inst.wallet.balance(token);
    let rate = rates[token];
    if rate.is_zero() {
        return if d.is_zero() || m / d >= *cmin { Some(balance) } else { None };
    }
    let room = (m / *cmin - d) / rate;
    floor_amount(&room).map(|x| x.min(balance))
}
