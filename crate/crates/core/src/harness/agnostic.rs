//! Randomised semantic test of sender-agnosticism: the same call from two
//! different senders must have the same effect, except that transfers to
//! the sender follow the substitution.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flows::all_users;
use crate::engine::{craftable, CraftPolicy, EngineError};
use crate::model::{AccountId, BlockchainState, Value};
use crate::vm::{self, Execution, ExecutionEvent, Invocation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgnosticReport {
    pub contract: AccountId,
    pub declared: bool,
    /// No counterexample was found.
    pub agnostic: bool,
    pub trials: usize,
    pub counterexample: Option<String>,
}

fn sample_states(state: &BlockchainState, limit: usize) -> Result<Vec<Arc<BlockchainState>>, EngineError> {
    let root = Arc::new(state.clone());
    let mut out = vec![root.clone()];
    let Some(users) = all_users(state) else { return Ok(out) };
    let policy = CraftPolicy::unrestricted();
    let mut seen: HashSet<Arc<BlockchainState>> = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        for tx in craftable(&s, &policy, &users, true, 0)? {
            if out.len() >= limit {
                return Ok(out);
            }
            let ex = vm::execute(&s, &tx)?;
            if ex.trace.committed() && !seen.contains(&ex.state) {
                let next = Arc::new(ex.state);
                seen.insert(next.clone());
                out.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

/// Stands in for both senders when comparing the two runs. A transfer to
/// the sender and a transfer to a fixed account that happens to be one of
/// the two senders are indistinguishable by their effect alone.
fn placeholder() -> AccountId {
    AccountId::user("\u{22a5}")
}

fn collapse(id: &AccountId, a: &AccountId, b: &AccountId) -> AccountId {
    if id == a || id == b {
        placeholder()
    } else {
        id.clone()
    }
}

fn user_transfers(ex: &Execution, a: &AccountId, b: &AccountId) -> Vec<ExecutionEvent> {
    let mut out: Vec<ExecutionEvent> = ex
        .trace
        .events
        .iter()
        .filter_map(|e| match e {
            ExecutionEvent::Transfer { from, to, amount, token } if to.is_user() && *amount > 0 => {
                Some(ExecutionEvent::Transfer {
                    from: collapse(from, a, b),
                    to: collapse(to, a, b),
                    amount: *amount,
                    token: token.clone(),
                })
            }
            _ => None,
        })
        .collect();
    out.sort();
    out
}

fn erase(v: &Value, a: &AccountId, b: &AccountId) -> Value {
    v.substitute(a, &placeholder()).substitute(b, &placeholder())
}

/// Describes how the two runs differ, if they do.
fn compare(a: &AccountId, b: &AccountId, run_a: &Execution, run_b: &Execution) -> Option<String> {
    match (run_a.trace.committed(), run_b.trace.committed()) {
        (false, false) => return None,
        (true, false) => return Some(format!("commits with sender {a} but reverts with sender {b}")),
        (false, true) => return Some(format!("reverts with sender {a} but commits with sender {b}")),
        (true, true) => {}
    }
    for (id, ca) in run_a.state.contracts() {
        let cb = run_b.state.contract(id)?;
        if ca.wallet != cb.wallet {
            return Some(format!("{id} ends with {} for sender {a} but {} for sender {b}", ca.wallet, cb.wallet));
        }
        for (key, va) in &ca.storage {
            let vb = cb.storage.get(key).cloned().unwrap_or(Value::Null);
            if erase(va, a, b) != erase(&vb, a, b) {
                return Some(format!("{id}.{key} is {va} for sender {a} but {vb} for sender {b}"));
            }
        }
    }
    if user_transfers(run_a, a, b) != user_transfers(run_b, a, b) {
        return Some(format!("transfers to users differ between senders {a} and {b}"));
    }
    None
}

/// Calls `contract` from sampled reachable states with pairs of distinct
/// senders. The payer and origin stay the same user.
pub fn test_sender_agnostic(
    state: &BlockchainState,
    contract: &AccountId,
    trials: usize,
    seed: u64,
) -> Result<AgnosticReport, EngineError> {
    let declared = state.contract(contract).map(|c| c.declared_sender_agnostic).ok_or_else(|| EngineError::BadTarget(contract.clone()))?;
    let mut report = AgnosticReport { contract: contract.clone(), declared, agnostic: true, trials: 0, counterexample: None };
    let Some(users) = all_users(state) else { return Ok(report) };
    let states = sample_states(state, 64)?;
    let mut pool: Vec<AccountId> = state.user_ids().into_iter().chain(state.contract_ids()).collect();
    pool.push(AccountId::user("fresh_sender"));
    let pool: Vec<AccountId> = pool.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let policy = CraftPolicy::only([contract.clone()]);
    let mut calls = Vec::with_capacity(states.len());
    for s in &states {
        calls.push(craftable(s, &policy, &users, true, 0)?);
    }
    if calls.iter().all(Vec::is_empty) {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while report.trials < trials && attempts < trials * 4 {
        attempts += 1;
        let i = rng.gen_range(0..states.len());
        let Some(tx) = calls[i].choose(&mut rng) else { continue };
        let picked: Vec<&AccountId> = pool.choose_multiple(&mut rng, 2).collect();
        let (a, b) = (picked[0], picked[1]);
        let with = |sender: &AccountId| Invocation {
            sender: sender.clone(),
            origin: tx.signer.clone(),
            payer: tx.signer.clone(),
            callee: tx.callee.clone(),
            function: tx.function.to_string(),
            args: tx.args.clone(),
            payments: tx.payments.clone(),
        };
        let (Ok(run_a), Ok(run_b)) = (vm::invoke(&states[i], &with(a)), vm::invoke(&states[i], &with(b))) else {
            continue;
        };
        report.trials += 1;
        if let Some(diff) = compare(a, b, &run_a, &run_b) {
            report.agnostic = false;
            report.counterexample = Some(format!("{}.{}: {diff}", tx.callee, tx.function));
            break;
        }
    }
    Ok(report)
}
