//! Beam search over transaction sequences with thinned amount grids,
//! analytic hints and guard-boundary candidates. Results are lower bounds.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rayon::prelude::*;

use super::{craft, AdversaryModel, CraftPolicy, EngineError, Lmev, SearchBudget, SearchMode};
use crate::model::{AccountId, BlockchainState, Transaction, Value};
use crate::rational::{int, Rational};
use crate::vm;

#[derive(Clone)]
struct Path {
    state: Arc<BlockchainState>,
    seq: Vec<Transaction>,
    loss: Rational,
}

struct Step {
    grid: usize,
    w0: Rational,
}

impl Step {
    fn successors(
        &self,
        state: &BlockchainState,
        targets: &BTreeSet<AccountId>,
        policy: &CraftPolicy,
        adv: &AdversaryModel,
    ) -> Result<Vec<(Transaction, BlockchainState, Rational)>, EngineError> {
        let mut out = Vec::new();
        for tx in craft::craftable(state, policy, adv, false, self.grid)? {
            let ex = vm::execute(state, &tx)?;
            if ex.trace.committed() && ex.state != *state {
                let loss = self.w0 - ex.state.wealth(targets)?;
                out.push((tx, ex.state, loss));
            }
        }
        Ok(out)
    }
}

fn better(a: &(Rational, Vec<Transaction>), b: &(Rational, Vec<Transaction>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && (a.1.len(), &a.1) < (b.1.len(), &b.1))
}

pub(crate) fn search(
    s0: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    policy: &CraftPolicy,
    adv: &AdversaryModel,
    budget: &SearchBudget,
) -> Result<Lmev, EngineError> {
    let w0 = s0.wealth(targets)?;
    let step = Step { grid: budget.grid, w0 };
    let mut best: (Rational, Vec<Transaction>) = (int(0), Vec::new());
    let mut explored = 1usize;
    let mut depth = 0;
    if w0 > int(0) {
        let root = Arc::new(s0.clone());
        let mut seen: HashSet<Arc<BlockchainState>> = HashSet::new();
        seen.insert(root.clone());
        let mut beam = vec![Path { state: root, seq: Vec::new(), loss: int(0) }];
        while depth < budget.max_depth && !beam.is_empty() {
            depth += 1;
            let expanded: Vec<_> = beam
                .par_iter()
                .map(|p| step.successors(&p.state, targets, policy, adv))
                .collect::<Result<_, _>>()?;
            let mut children = Vec::new();
            for (parent, succs) in beam.iter().zip(expanded) {
                for (tx, state, loss) in succs {
                    if seen.contains(&state) {
                        continue;
                    }
                    let state = Arc::new(state);
                    seen.insert(state.clone());
                    let mut seq = parent.seq.clone();
                    seq.push(tx);
                    children.push(Path { state, seq, loss });
                }
            }
            explored += children.len();
            for c in &children {
                let cand = (c.loss, c.seq.clone());
                if better(&cand, &best) {
                    best = cand;
                }
            }
            if best.0 == w0 || children.is_empty() {
                break;
            }
            // One-step lookahead scores each child by the best loss reachable
            // from it, which keeps set-up moves such as oracle manipulation
            // in the beam.
            let looked: Vec<(Rational, Option<Transaction>)> = children
                .par_iter()
                .map(|c| {
                    let succs = step.successors(&c.state, targets, policy, adv)?;
                    let mut top: (Rational, Option<Transaction>) = (c.loss, None);
                    for (tx, _, loss) in succs {
                        if loss > top.0 {
                            top = (loss, Some(tx));
                        }
                    }
                    Ok(top)
                })
                .collect::<Result<_, EngineError>>()?;
            let mut scored: Vec<(Rational, Path)> = Vec::with_capacity(children.len());
            for (c, (score, tx)) in children.into_iter().zip(looked) {
                if let Some(tx) = tx {
                    let mut seq = c.seq.clone();
                    seq.push(tx);
                    let cand = (score, seq);
                    if better(&cand, &best) {
                        best = cand;
                    }
                }
                scored.push((score, c));
            }
            if best.0 == w0 {
                break;
            }
            scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.seq.cmp(&b.1.seq)));
            scored.truncate(budget.beam.max(1));
            beam = scored.into_iter().map(|(_, p)| p).collect();
        }
        best = refine(s0, targets, w0, best)?;
    }
    Ok(Lmev {
        value: best.0,
        witness: best.1,
        mode: SearchMode::Heuristic,
        states_explored: explored,
        depth,
        lower_bound: true,
    })
}

/// Amount slots of a transaction: payments first, then integer arguments.
fn slots(tx: &Transaction) -> usize {
    tx.payments.len() + tx.args.iter().filter(|a| matches!(a, Value::Int(_))).count()
}

fn nudge(tx: &Transaction, slot: usize, delta: i128) -> Option<Transaction> {
    let mut out = tx.clone();
    if slot < out.payments.len() {
        let p = &mut out.payments[slot];
        p.amount = u64::try_from(p.amount as i128 + delta).ok().filter(|a| *a > 0)?;
        return Some(out);
    }
    let mut k = slot - out.payments.len();
    for a in out.args.iter_mut() {
        if let Value::Int(n) = a {
            if k == 0 {
                let next = *n + delta;
                if next < 0 {
                    return None;
                }
                *n = next;
                return Some(out);
            }
            k -= 1;
        }
    }
    None
}

fn replay(s0: &BlockchainState, targets: &BTreeSet<AccountId>, w0: Rational, seq: &[Transaction]) -> Result<(Rational, Vec<Transaction>), EngineError> {
    let mut state = s0.clone();
    let mut kept = Vec::new();
    for tx in seq {
        let ex = vm::execute(&state, tx)?;
        if ex.trace.committed() {
            state = ex.state;
            kept.push(tx.clone());
        }
    }
    Ok((w0 - state.wealth(targets)?, kept))
}

/// Hill-climbs every amount in the witness by small steps.
fn refine(
    s0: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    w0: Rational,
    mut best: (Rational, Vec<Transaction>),
) -> Result<(Rational, Vec<Transaction>), EngineError> {
    const DELTAS: [i128; 6] = [-3, -2, -1, 1, 2, 3];
    for _ in 0..8 {
        let mut improved = false;
        for i in 0..best.1.len() {
            for slot in 0..slots(&best.1[i]) {
                for d in DELTAS {
                    let Some(tx) = nudge(&best.1[i], slot, d) else { continue };
                    let mut seq = best.1.clone();
                    seq[i] = tx;
                    let cand = replay(s0, targets, w0, &seq)?;
                    if cand.0 > best.0 {
                        best = cand;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}
