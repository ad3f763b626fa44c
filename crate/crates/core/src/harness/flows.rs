//! Token inflows and outflows of contract groups over reachable executions.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::engine::{craftable, AdversaryModel, CraftPolicy, EngineError};
use crate::model::{AccountId, BlockchainState, TokenId};
use crate::vm::{self, ExecutionEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exploration {
    Exhaustive,
    /// Stopped after this many states.
    Bounded(usize),
}

impl fmt::Display for Exploration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exploration::Exhaustive => f.write_str("exhaustive"),
            Exploration::Bounded(n) => write!(f, "bounded({n} states)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFlowSets {
    pub intok: BTreeSet<TokenId>,
    pub outtok: BTreeSet<TokenId>,
    pub exploration: Exploration,
}

/// Every transaction any user of the state can craft, against any contract.
pub(crate) fn all_users(state: &BlockchainState) -> Option<AdversaryModel> {
    AdversaryModel::new(state.user_ids()).ok()
}

/// Visits reachable states breadth-first, driving execution with every
/// user's candidate transactions, and hands each committed event list to
/// `visit`. Returns how the exploration ended.
pub(crate) fn explore(
    state: &BlockchainState,
    max_states: usize,
    mut visit: impl FnMut(&[ExecutionEvent]),
) -> Result<Exploration, EngineError> {
    let Some(users) = all_users(state) else { return Ok(Exploration::Exhaustive) };
    let policy = CraftPolicy::unrestricted();
    let mut seen: HashSet<Arc<BlockchainState>> = HashSet::new();
    let root = Arc::new(state.clone());
    seen.insert(root.clone());
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        for tx in craftable(&s, &policy, &users, true, 0)? {
            let ex = vm::execute(&s, &tx)?;
            if !ex.trace.committed() {
                continue;
            }
            visit(&ex.trace.events);
            if seen.contains(&ex.state) {
                continue;
            }
            if seen.len() >= max_states {
                return Ok(Exploration::Bounded(seen.len()));
            }
            let next = Arc::new(ex.state);
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    Ok(Exploration::Exhaustive)
}

/// Tokens that can flow into `subset` from outside it, and out of it.
/// Users count as outside.
pub fn compute_token_flows(
    state: &BlockchainState,
    subset: &BTreeSet<AccountId>,
    max_states: usize,
) -> Result<TokenFlowSets, EngineError> {
    let mut intok = BTreeSet::new();
    let mut outtok = BTreeSet::new();
    if subset.is_empty() {
        return Ok(TokenFlowSets { intok, outtok, exploration: Exploration::Exhaustive });
    }
    let exploration = explore(state, max_states, |events| {
        for e in events {
            if let ExecutionEvent::Transfer { from, to, amount, token } = e {
                if *amount == 0 {
                    continue;
                }
                match (subset.contains(from), subset.contains(to)) {
                    (false, true) => {
                        intok.insert(token.clone());
                    }
                    (true, false) => {
                        outtok.insert(token.clone());
                    }
                    _ => {}
                }
            }
        }
    })?;
    Ok(TokenFlowSets { intok, outtok, exploration })
}

/// Whether `a` and `b` are token independent, with both flow sets.
pub fn token_independent(
    state: &BlockchainState,
    a: &BTreeSet<AccountId>,
    b: &BTreeSet<AccountId>,
    max_states: usize,
) -> Result<(bool, TokenFlowSets, TokenFlowSets), EngineError> {
    let fa = compute_token_flows(state, a, max_states)?;
    let fb = compute_token_flows(state, b, max_states)?;
    let independent = fa.intok.is_disjoint(&fb.outtok) && fb.intok.is_disjoint(&fa.outtok);
    Ok((independent, fa, fb))
}
