//! Brute-force reference for local MEV, written without the engine's
//! candidate generator or search: breadth-first over every transaction the
//! adversary can send, layer by layer, until no new state appears.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use mevlab_core::contracts::ContractKind;
use mevlab_core::model::{AccountId, BlockchainState, Transaction, Value};
use mevlab_core::rational::{int, Rational};
use mevlab_core::vm;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Brute {
    pub value: Rational,
    /// Number of layers explored before the state set stopped growing, or
    /// the layer where the loss reached the targets' whole wealth.
    pub depth: usize,
    pub states: usize,
}

/// Shares `k/d` in `[0, 1]` for every `d` up to `max_den`.
fn shares(max_den: i128) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for d in 1..=max_den.max(2) {
        for k in 0..=d {
            out.insert(Rational::new(k, d));
        }
    }
    out
}

fn candidates(state: &BlockchainState, adv: &AccountId, callees: &BTreeSet<AccountId>) -> Vec<Transaction> {
    let mut out = Vec::new();
    for (c, inst) in state.contracts() {
        if !callees.contains(c) {
            continue;
        }
        let tx = |f: &str| Transaction::new(adv, c, f);
        let held = |t| state.balance(adv, t);
        let own = |t| state.balance(c, t);
        match inst.kind.as_ref() {
            ContractKind::Airdrop { token } | ContractKind::AirdropFee { token, .. } => {
                for x in 0..=own(token) {
                    out.push(tx("withdraw").arg(Value::Int(x as i128)));
                }
                for x in 1..=held(token) {
                    out.push(tx("fund").pay(x, token));
                }
            }
            ContractKind::FeeManager { .. } => {
                for r in 0..=100 {
                    out.push(tx("setFee").arg(Value::Int(r)));
                }
            }
            ContractKind::Exchange { tin, .. } => {
                for x in 1..=held(tin) {
                    out.push(tx("swap").pay(x, tin));
                }
                for r in [Rational::new(1, 2), int(1), int(2), int(3)] {
                    out.push(tx("setRate").arg(Value::Rat(r)));
                }
            }
            ContractKind::Amm { t0, t1 } => {
                for t in [t0, t1] {
                    for x in 1..=held(t) {
                        out.push(tx("swap").arg(Value::Int(0)).pay(x, t));
                    }
                }
            }
            ContractKind::Bet { native, .. } => {
                let pot = own(native) as i128;
                for p in shares(2 * pot) {
                    for x in 1..=held(native) {
                        out.push(tx("bet").arg(Value::Rat(p)).pay(x, native));
                    }
                }
                out.push(tx("win"));
                out.push(tx("close"));
            }
            ContractKind::Lp { .. } => {
                let tokens: BTreeSet<_> = state.tokens();
                for t in &tokens {
                    for x in 1..=held(t) {
                        out.push(tx("deposit").pay(x, t));
                    }
                    for x in 1..=own(t) {
                        out.push(tx("borrow").arg(Value::Int(x as i128)).arg(Value::Token(t.clone())));
                    }
                }
            }
            ContractKind::Doubler { token } => {
                for x in 1..=held(token) {
                    out.push(tx("double").pay(x, token));
                    out.push(tx("fund").pay(x, token));
                }
            }
            ContractKind::Fixture(script) => {
                for f in script.functions.keys() {
                    out.push(tx(f));
                    for x in 1..=held(&script.token) {
                        out.push(tx(f).pay(x, &script.token));
                    }
                }
            }
        }
    }
    out
}

/// Largest loss of `targets` over every state reachable by transactions of
/// `adv` to `callees`.
pub fn brute_lmev(
    state: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    callees: &BTreeSet<AccountId>,
    adv: &AccountId,
) -> Brute {
    let start = state.wealth(targets).expect("priced tokens");
    let mut seen: HashSet<BlockchainState> = HashSet::from([state.clone()]);
    let mut layer = vec![state.clone()];
    let mut best = int(0);
    let mut depth = 0;
    while !layer.is_empty() && best < start {
        let mut next = Vec::new();
        for s in &layer {
            for tx in candidates(s, adv, callees) {
                let ex = vm::execute(s, &tx).expect("no model faults");
                if !ex.trace.committed() || seen.contains(&ex.state) {
                    continue;
                }
                let loss = start - ex.state.wealth(targets).expect("priced tokens");
                if loss > best {
                    best = loss;
                }
                seen.insert(ex.state.clone());
                next.push(ex.state);
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        layer = next;
    }
    Brute { value: best, depth, states: seen.len() }
}

pub fn contracts(ids: &[&str]) -> BTreeSet<AccountId> {
    ids.iter().map(|s| AccountId::contract(s)).collect()
}
