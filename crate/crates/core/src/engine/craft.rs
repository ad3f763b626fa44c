//! Candidate transactions an adversary can craft against a state.
//!
//! In exhaustive mode every integer parameter ranges over the balances that
//! bound it, so a single adversary step reaches every post-state any
//! transaction could reach. Rational parameters range over finite sets that
//! cover every distinct outcome (see the per-kind notes below). In grid mode
//! the ranges are thinned to a fixed number of points plus hints.

use std::collections::BTreeSet;

use super::{AdversaryModel, Callees, CraftPolicy, EngineError};
use crate::contracts::{self, ContractKind, Script};
use crate::model::{AccountId, Amount, BlockchainState, TokenId, Transaction, Value};
use crate::rational::{self, amount, int, Rational};
use crate::vm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Coverage {
    Exhaustive,
    Grid(usize),
}

struct Ctx<'a> {
    state: &'a BlockchainState,
    policy: &'a CraftPolicy,
    coverage: Coverage,
}

impl Ctx<'_> {
    /// Positive amounts up to `max`.
    fn amounts(&self, max: Amount, extra: &[Amount]) -> Vec<Amount> {
        match self.coverage {
            Coverage::Exhaustive => (1..=max).collect(),
            Coverage::Grid(points) => {
                let mut out: BTreeSet<Amount> = BTreeSet::new();
                if max == 0 {
                    return Vec::new();
                }
                let points = points.max(1) as u128;
                for i in 1..=points {
                    let a = (max as u128 * i).div_ceil(points) as Amount;
                    out.insert(a.clamp(1, max));
                }
                out.insert(1);
                out.extend(self.policy.hints.amounts.iter().copied().filter(|a| (1..=max).contains(a)));
                out.extend(extra.iter().copied().filter(|a| (1..=max).contains(a)));
                out.into_iter().collect()
            }
        }
    }
}

/// Every candidate from every adversary account, sorted and deduplicated.
pub fn craftable(
    state: &BlockchainState,
    policy: &CraftPolicy,
    adv: &AdversaryModel,
    exhaustive: bool,
    grid: usize,
) -> Result<Vec<Transaction>, EngineError> {
    let coverage = if exhaustive { Coverage::Exhaustive } else { Coverage::Grid(grid) };
    let ctx = Ctx { state, policy, coverage };
    let mut out = BTreeSet::new();
    for (id, inst) in state.contracts() {
        let allowed = match &policy.callees {
            Callees::Unrestricted => true,
            Callees::Only(set) => set.contains(id),
        };
        if !allowed {
            continue;
        }
        for a in &adv.accounts {
            for_contract(&ctx, a, id, &inst.kind, &mut out)?;
        }
    }
    Ok(out.into_iter().collect())
}

fn for_contract(
    ctx: &Ctx<'_>,
    a: &AccountId,
    c: &AccountId,
    kind: &ContractKind,
    out: &mut BTreeSet<Transaction>,
) -> Result<(), EngineError> {
    let s = ctx.state;
    let held = |t: &TokenId| s.balance(a, t);
    let owned = |t: &TokenId| s.balance(c, t);
    let tx = |f: &str| Transaction::new(a, c, f);
    match kind {
        ContractKind::Airdrop { token } | ContractKind::AirdropFee { token, .. } => {
            for x in ctx.amounts(owned(token), &[]) {
                out.insert(tx("withdraw").arg(Value::amount(x)));
            }
            for x in ctx.amounts(held(token), &[]) {
                out.insert(tx("fund").pay(x, token));
            }
        }
        ContractKind::FeeManager { .. } => {
            for r in 0..=100 {
                out.insert(tx("setFee").arg(Value::Int(r)));
            }
        }
        ContractKind::Exchange { tin, tout, owner, .. } => {
            for x in ctx.amounts(held(tin), &[]) {
                out.insert(tx("swap").pay(x, tin));
            }
            let current_owner = s.contract(c).and_then(|i| i.get("owner")).and_then(Value::as_account).unwrap_or(owner);
            if current_owner == a {
                for r in exchange_rates(ctx, s, c, tin, tout)? {
                    out.insert(tx("setRate").arg(Value::Rat(r)));
                }
            }
        }
        ContractKind::Amm { t0, t1 } => {
            for t in [t0, t1] {
                for x in ctx.amounts(held(t), &[]) {
                    out.insert(tx("swap").arg(Value::Int(0)).pay(x, t));
                }
            }
        }
        ContractKind::Bet { oracle, native, rate, .. } => {
            let inst = s.contract(c).expect("iterating over contracts");
            if inst.get("player").map(|p| *p == Value::Null).unwrap_or(true) {
                let pot = owned(native);
                if held(native) >= pot {
                    for p in bet_shares(ctx, c, oracle, native, rate, pot)? {
                        let t = tx("bet").arg(Value::Rat(p));
                        out.insert(if pot > 0 { t.pay(pot, native) } else { t });
                    }
                }
            } else if inst.get("player").and_then(Value::as_account) == Some(a) {
                out.insert(tx("win"));
            }
            out.insert(tx("close"));
        }
        ContractKind::Lp { .. } => {
            if let Some(w) = s.wallet(a) {
                for (t, bal) in w.iter() {
                    for x in ctx.amounts(bal, &[]) {
                        out.insert(tx("deposit").pay(x, t));
                    }
                }
            }
            if let Some(w) = s.wallet(c) {
                for (t, bal) in w.iter() {
                    let edge: Vec<Amount> = contracts::max_borrow(s, c, a, t).into_iter().collect();
                    for x in ctx.amounts(bal, &edge) {
                        out.insert(tx("borrow").arg(Value::amount(x)).arg(Value::Token(t.clone())));
                    }
                }
            }
        }
        ContractKind::Doubler { token } => {
            for x in ctx.amounts(held(token), &[]) {
                out.insert(tx("double").pay(x, token));
            }
        }
        ContractKind::Fixture(script) => fixture_calls(ctx, a, c, script, out),
    }
    Ok(())
}

fn fixture_calls(ctx: &Ctx<'_>, a: &AccountId, c: &AccountId, script: &Script, out: &mut BTreeSet<Transaction>) {
    for function in script.functions.keys() {
        let base = Transaction::new(a, c, function);
        match script.expected_payment(function) {
            None => {
                out.insert(base);
            }
            Some((t, Some(k))) => {
                if ctx.state.balance(a, &t) >= k {
                    out.insert(if k > 0 { base.pay(k, &t) } else { base });
                }
            }
            Some((t, None)) => {
                for x in ctx.amounts(ctx.state.balance(a, &t), &[]) {
                    out.insert(base.clone().pay(x, &t));
                }
            }
        }
    }
}

/// Shares a bet may be entered with.
///
/// Payouts are `floor(p·B)` for pot balances `B ≤ 2·pot`, so they only change
/// at fractions with denominator at most `2·pot`. Any `p` strictly between
/// two such fractions pays the same as the fraction below it, and that one
/// passes the `oracle ≥ p·rate` guard whenever `p` does, so the Farey
/// sequence of that order loses nothing.
fn bet_shares(
    ctx: &Ctx<'_>,
    bet: &AccountId,
    oracle: &AccountId,
    native: &TokenId,
    rate: &Rational,
    pot: Amount,
) -> Result<BTreeSet<Rational>, EngineError> {
    let zero = int(0);
    let one = int(1);
    let mut out: BTreeSet<Rational> = BTreeSet::new();
    match ctx.coverage {
        Coverage::Exhaustive => out.extend(rational::farey((2 * pot).max(1))),
        Coverage::Grid(points) => {
            let points = points.max(1) as i128;
            out.extend((0..=points).map(|i| rational::frac(i, points)));
        }
    }
    out.insert(zero);
    out.insert(one);
    out.insert(rational::frac(1, 2));
    if let Some(observed) = vm::view(ctx.state, bet, oracle, "getRate", &[Value::Token(native.clone())])?
        .and_then(|v| v.as_rational())
    {
        out.insert((observed / rate).clamp(zero, one));
    }
    out.extend(ctx.policy.hints.rationals.iter().filter(|p| **p >= zero && **p <= one).copied());
    Ok(out)
}

/// Rates an owning adversary may set on an exchange.
///
/// A rate only matters through `floor(x·rate)` for payments `x ≤ S_in` and
/// the `balance ≥ y` guard with `y ≤ S_out`, so the fractions `k/x` with
/// `k ≤ S_out`, `1 ≤ x ≤ S_in`, plus one rate large enough to make every swap
/// fail, reach every distinct swap behaviour. Other contracts reading the
/// rate continuously break that argument.
fn exchange_rates(
    ctx: &Ctx<'_>,
    s: &BlockchainState,
    c: &AccountId,
    tin: &TokenId,
    tout: &TokenId,
) -> Result<BTreeSet<Rational>, EngineError> {
    let s_in = s.supply_of(tin).min(Amount::MAX as u128) as Amount;
    let s_out = s.supply_of(tout).min(Amount::MAX as u128) as Amount;
    let mut out = BTreeSet::new();
    match ctx.coverage {
        Coverage::Exhaustive => {
            if let Some((reader, _)) = s.contracts().iter().find(|(_, i)| i.static_deps.contains(c)) {
                return Err(EngineError::NotEffectComplete {
                    contract: c.clone(),
                    reason: format!("its rate is read by {reader} and can be set to arbitrary values"),
                });
            }
            for x in 1..=s_in.max(1) {
                for k in 1..=s_out {
                    out.insert(Rational::new(k as i128, x as i128));
                }
            }
        }
        Coverage::Grid(_) => {
            for x in ctx.amounts(s_in.max(1), &[]) {
                for k in ctx.amounts(s_out, &[]) {
                    out.insert(Rational::new(k as i128, x as i128));
                }
            }
            out.extend(ctx.policy.hints.rationals.iter().filter(|r| **r > int(0)).copied());
        }
    }
    out.insert(amount(s_out) + int(1));
    Ok(out)
}
