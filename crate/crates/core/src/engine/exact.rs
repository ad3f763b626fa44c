//! Exhaustive breadth-first exploration of the reachable-state graph.
//!
//! Loss depends only on the final state, so the maximum over sequences is the
//! maximum over reachable states. Layers are expanded in parallel and merged
//! in a fixed order, so the first state found with the best loss is reached
//! by a shortest witness whose transactions are smallest in candidate order.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use super::{check_supply, craft, AdversaryModel, CraftPolicy, EngineError, Lmev, SearchBudget, SearchMode};
use crate::model::{AccountId, BlockchainState, Transaction};
use crate::rational::{int, Rational};
use crate::vm;

struct Node {
    state: Arc<BlockchainState>,
    parent: Option<(usize, Transaction)>,
}

fn witness(nodes: &[Node], mut at: usize) -> Vec<Transaction> {
    let mut out = Vec::new();
    while let Some((p, tx)) = &nodes[at].parent {
        out.push(tx.clone());
        at = *p;
    }
    out.reverse();
    out
}

/// Committed single-transaction successors of `state`, in candidate order.
pub(crate) fn successors(
    state: &BlockchainState,
    policy: &CraftPolicy,
    adv: &AdversaryModel,
) -> Result<Vec<(Transaction, BlockchainState)>, EngineError> {
    let mut out = Vec::new();
    for tx in craft::craftable(state, policy, adv, true, 0)? {
        let ex = vm::execute(state, &tx)?;
        if ex.trace.committed() && ex.state != *state {
            out.push((tx, ex.state));
        }
    }
    Ok(out)
}

pub(crate) fn search(
    s0: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    policy: &CraftPolicy,
    adv: &AdversaryModel,
    budget: &SearchBudget,
) -> Result<Lmev, EngineError> {
    check_supply(s0, budget.exhaustive_supply_bound)?;
    let w0 = s0.wealth(targets)?;
    let mut result = Lmev {
        value: int(0),
        witness: Vec::new(),
        mode: SearchMode::Exact,
        states_explored: 1,
        depth: 0,
        lower_bound: false,
    };
    if w0 == int(0) {
        return Ok(result);
    }
    let root = Arc::new(s0.clone());
    let mut nodes = vec![Node { state: root.clone(), parent: None }];
    let mut index: HashMap<Arc<BlockchainState>, usize> = HashMap::new();
    index.insert(root, 0);
    let mut frontier = vec![0usize];
    let mut best: (Rational, usize) = (int(0), 0);
    let mut depth = 0;
    while !frontier.is_empty() {
        let expanded: Vec<Vec<(Transaction, BlockchainState)>> = frontier
            .par_iter()
            .map(|&i| successors(&nodes[i].state, policy, adv))
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for (&parent, succs) in frontier.iter().zip(expanded) {
            for (tx, state) in succs {
                if index.contains_key(&state) {
                    continue;
                }
                let loss = w0 - state.wealth(targets)?;
                let state = Arc::new(state);
                let id = nodes.len();
                index.insert(state.clone(), id);
                nodes.push(Node { state, parent: Some((parent, tx)) });
                next.push(id);
                if loss > best.0 {
                    best = (loss, id);
                }
            }
        }
        if nodes.len() > budget.max_states {
            return Err(EngineError::Incomplete { explored: nodes.len(), limit: budget.max_states });
        }
        if !next.is_empty() {
            depth += 1;
        }
        frontier = next;
        // Nothing can beat draining every target.
        if best.0 == w0 {
            break;
        }
    }
    result.value = best.0;
    result.witness = witness(&nodes, best.1);
    result.states_explored = nodes.len();
    result.depth = depth;
    Ok(result)
}
