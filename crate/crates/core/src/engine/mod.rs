//! Gain and loss, local MEV (restricted and unrestricted) and MEV
//! interference.

mod craft;
mod exact;
mod heuristic;
pub mod hints;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::model::{AccountId, BlockchainState, ContractInstance, ModelError, TokenId, Transaction};
use crate::rational::{int, Rational};
use crate::vm::{self, Fault};

pub use craft::craftable;
pub use hints::Hints;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("execution fault: {0}")]
    Fault(#[from] Fault),
    #[error("exact search incomplete: {explored} states exceed the budget of {limit}")]
    Incomplete { explored: usize, limit: usize },
    #[error("supply of {token} is {supply}, above the exhaustive bound {bound}")]
    SupplyTooLarge { token: TokenId, supply: u128, bound: u128 },
    #[error("cannot enumerate every effect of {contract}: {reason}")]
    NotEffectComplete { contract: AccountId, reason: String },
    #[error("adversary set is empty")]
    NoAdversary,
    #[error("adversary {0} is not a user account of the state")]
    BadAdversary(AccountId),
    #[error("target {0} is not a contract of the state")]
    BadTarget(AccountId),
}

/// The accounts controlled by the adversary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryModel {
    pub accounts: BTreeSet<AccountId>,
}

impl AdversaryModel {
    pub fn new(accounts: impl IntoIterator<Item = AccountId>) -> Result<Self, EngineError> {
        let accounts: BTreeSet<AccountId> = accounts.into_iter().collect();
        if accounts.is_empty() {
            return Err(EngineError::NoAdversary);
        }
        if let Some(bad) = accounts.iter().find(|a| !a.is_user()) {
            return Err(EngineError::BadAdversary(bad.clone()));
        }
        Ok(AdversaryModel { accounts })
    }

    pub fn single(id: &AccountId) -> Self {
        Self::new([id.clone()]).expect("a single user account")
    }
}

/// Which contracts the adversary may call directly.
#[derive(Debug, Clone, PartialEq, Eq)]
#[derive(Default)]
pub enum Callees {
    #[default]
    Unrestricted,
    Only(BTreeSet<AccountId>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CraftPolicy {
    pub callees: Callees,
    pub hints: Hints,
}


impl CraftPolicy {
    pub fn unrestricted() -> Self {
        CraftPolicy { callees: Callees::Unrestricted, hints: Hints::default() }
    }

    pub fn only(callees: impl IntoIterator<Item = AccountId>) -> Self {
        CraftPolicy { callees: Callees::Only(callees.into_iter().collect()), hints: Hints::default() }
    }

    pub fn with_hints(mut self, hints: Hints) -> Self {
        self.hints = hints;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Heuristic,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exact => "exact",
            SearchMode::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    pub mode: SearchMode,
    /// Exact mode fails with [`EngineError::Incomplete`] past this many states.
    pub max_states: usize,
    /// Heuristic sequence length.
    pub max_depth: usize,
    /// Points per amount dimension in heuristic mode.
    pub grid: usize,
    /// Sequences kept per heuristic layer.
    pub beam: usize,
    /// Per-token supply above which exact mode refuses to run.
    pub exhaustive_supply_bound: u128,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            mode: SearchMode::Exact,
            max_states: 2_000_000,
            max_depth: 6,
            grid: 32,
            beam: 64,
            exhaustive_supply_bound: 256,
        }
    }
}

impl SearchBudget {
    pub fn exact() -> Self {
        SearchBudget::default()
    }

    pub fn heuristic() -> Self {
        SearchBudget { mode: SearchMode::Heuristic, ..SearchBudget::default() }
    }
}

/// Result of a single local-MEV search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lmev {
    pub value: Rational,
    pub witness: Vec<Transaction>,
    pub mode: SearchMode,
    pub states_explored: usize,
    /// Exact mode: the depth at which the search reached its fixpoint or the
    /// optimum. Heuristic mode: the depth searched.
    pub depth: usize,
    /// Heuristic results are lower bounds.
    pub lower_bound: bool,
}

/// Wealth gained by `targets` when `txs` run from `state`. Reverted
/// transactions are skipped.
pub fn gain(targets: &BTreeSet<AccountId>, state: &BlockchainState, txs: &[Transaction]) -> Result<Rational, EngineError> {
    let (after, _) = vm::execute_sequence(state, txs)?;
    Ok(after.wealth(targets)? - state.wealth(targets)?)
}

pub fn loss(targets: &BTreeSet<AccountId>, state: &BlockchainState, txs: &[Transaction]) -> Result<Rational, EngineError> {
    Ok(-gain(targets, state, txs)?)
}

fn validate(state: &BlockchainState, targets: &BTreeSet<AccountId>, adv: &AdversaryModel) -> Result<(), EngineError> {
    state.check_well_formed().map_err(ModelError::from)?;
    for t in targets {
        if state.contract(t).is_none() {
            return Err(EngineError::BadTarget(t.clone()));
        }
    }
    for a in &adv.accounts {
        if !a.is_user() || state.contract(a).is_some() {
            return Err(EngineError::BadAdversary(a.clone()));
        }
    }
    Ok(())
}

/// Maximum loss the adversary can inflict on `targets` from `state`.
pub fn lmev(
    state: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    policy: &CraftPolicy,
    adv: &AdversaryModel,
    budget: &SearchBudget,
) -> Result<Lmev, EngineError> {
    validate(state, targets, adv)?;
    match budget.mode {
        SearchMode::Exact => exact::search(state, targets, policy, adv, budget),
        SearchMode::Heuristic => heuristic::search(state, targets, policy, adv, budget),
    }
}

/// Restricted and unrestricted local MEV of the new contracts, and the
/// interference the context causes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MevReport {
    pub targets: BTreeSet<AccountId>,
    pub restricted: Lmev,
    pub unrestricted: Lmev,
    pub interference: Rational,
    pub hints: Hints,
}

impl MevReport {
    pub fn restricted_mev(&self) -> Rational {
        self.restricted.value
    }

    pub fn unrestricted_mev(&self) -> Rational {
        self.unrestricted.value
    }
}

/// `1 - restricted/unrestricted`, or 0 when nothing can be extracted.
pub fn interference_ratio(restricted: &Rational, unrestricted: &Rational) -> Rational {
    if unrestricted.is_zero() {
        int(0)
    } else {
        int(1) - restricted / unrestricted
    }
}

/// Deploys `new_contracts` on top of `context`.
pub fn compose(
    context: &BlockchainState,
    new_contracts: &BTreeMap<AccountId, ContractInstance>,
) -> Result<BlockchainState, EngineError> {
    let mut state = context.clone();
    for (id, inst) in new_contracts {
        crate::contracts::deploy(&mut state, id.clone(), inst.clone())?;
    }
    state.check_well_formed().map_err(ModelError::from)?;
    Ok(state)
}

/// Interference caused by the rest of `state` on the contracts in `delta`.
pub fn interference(
    state: &BlockchainState,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    budget: &SearchBudget,
    hints: &Hints,
) -> Result<MevReport, EngineError> {
    let restricted_policy = CraftPolicy::only(delta.iter().cloned()).with_hints(hints.clone());
    let unrestricted_policy = CraftPolicy::unrestricted().with_hints(hints.clone());
    let restricted = lmev(state, delta, &restricted_policy, adv, budget)?;
    let mut unrestricted = lmev(state, delta, &unrestricted_policy, adv, budget)?;
    // Any restricted attack is also an unrestricted one; a beam search may
    // miss it in the larger space.
    if restricted.value > unrestricted.value {
        unrestricted.value = restricted.value;
        unrestricted.witness = restricted.witness.clone();
    }
    let interference = interference_ratio(&restricted.value, &unrestricted.value);
    Ok(MevReport { targets: delta.clone(), restricted, unrestricted, interference, hints: hints.clone() })
}

/// Exhaustive search refuses states whose token supplies are too large.
pub(crate) fn check_supply(state: &BlockchainState, bound: u128) -> Result<(), EngineError> {
    for (t, s) in state.supply() {
        if *s > bound {
            return Err(EngineError::SupplyTooLarge { token: t.clone(), supply: *s, bound });
        }
    }
    Ok(())
}
