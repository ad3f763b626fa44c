use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::agnostic::test_sender_agnostic;
use super::flows::{token_independent, Exploration};
use super::{Hypothesis, PropertyVerdict, Status};
use crate::contracts::FixtureSystem;
use crate::engine::{
    compose, interference, lmev, AdversaryModel, CraftPolicy, EngineError, Hints, Lmev, MevReport, SearchBudget,
};
use crate::model::{AccountId, BlockchainState, ContractInstance, Transaction};
use crate::rational::{int, Rational};
use crate::scenario::Scenario;

/// Search and sampling limits shared by every check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessConfig {
    pub budget: SearchBudget,
    /// States explored when collecting token flows.
    pub flow_states: usize,
    /// Sender pairs tried per contract by the agnosticism test.
    pub agnostic_trials: usize,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig { budget: SearchBudget::exact(), flow_states: 200_000, agnostic_trials: 200, seed: 0 }
    }
}

/// Budget overruns make a verdict inconclusive; anything else is an error.
fn settle<T>(r: Result<T, EngineError>) -> Result<Result<T, String>, EngineError> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (EngineError::Incomplete { .. } | EngineError::SupplyTooLarge { .. } | EngineError::NotEffectComplete { .. })) => {
            Ok(Err(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

macro_rules! attempt {
    ($verdict:ident, $e:expr) => {
        match settle($e)? {
            Ok(v) => v,
            Err(why) => {
                $verdict.status = Status::Inconclusive;
                $verdict.notes.push(why);
                return Ok($verdict);
            }
        }
    };
}

fn scenario_text(state: &BlockchainState, adv: &AdversaryModel, delta: &BTreeSet<AccountId>) -> String {
    Scenario::new(state.clone(), adv.clone(), delta.clone()).to_toml()
}

/// Scenario text for a local-MEV check, with no new contracts.
fn local_text(state: &BlockchainState, adv: &AdversaryModel, targets: &BTreeSet<AccountId>, callees: &BTreeSet<AccountId>) -> String {
    let mut s = Scenario::new(state.clone(), adv.clone(), BTreeSet::new());
    s.analysis.targets = Some(targets.clone());
    s.analysis.callees = Some(callees.clone());
    s.to_toml()
}

fn witnesses(label: &str, report: &MevReport) -> Vec<(String, Vec<Transaction>)> {
    vec![
        (format!("{label} restricted"), report.restricted.witness.clone()),
        (format!("{label} unrestricted"), report.unrestricted.witness.clone()),
    ]
}

fn mev(state: &BlockchainState, delta: &BTreeSet<AccountId>, adv: &AdversaryModel, cfg: &HarnessConfig) -> Result<MevReport, EngineError> {
    interference(state, delta, adv, &cfg.budget, &Hints::default())
}

fn local(
    state: &BlockchainState,
    callees: &BTreeSet<AccountId>,
    targets: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<Lmev, EngineError> {
    lmev(state, targets, &CraftPolicy::only(callees.iter().cloned()), adv, &cfg.budget)
}

fn in_unit_interval(r: &Rational) -> bool {
    *r >= int(0) && *r <= int(1)
}

/// `I(S, ∅) = 0`, `I(W | ∅, Δ) = 0` and `0 ≤ I(S, Δ) ≤ 1`.
pub fn check_basic_interference(
    state: &BlockchainState,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("basic_interference");
    let empty = attempt!(v, mev(state, &BTreeSet::new(), adv, cfg));
    v.record("I(S, empty)", empty.interference);
    if !empty.interference.is_zero() {
        v.fail(format!("I(S, empty) = {}", empty.interference), scenario_text(state, adv, &BTreeSet::new()), witnesses("empty", &empty));
    }

    let deps = state.deps(delta)?;
    if deps.is_subset(delta) {
        let bare = state.restrict_contracts(delta);
        let r = attempt!(v, mev(&bare, delta, adv, cfg));
        v.record("I(wallets only, delta)", r.interference);
        if !r.interference.is_zero() {
            v.fail(format!("contract-free context gives I = {}", r.interference), scenario_text(&bare, adv, delta), witnesses("bare", &r));
        }
    } else {
        v.notes.push("delta depends on context contracts, so it cannot be deployed on wallets alone".into());
    }

    let r = attempt!(v, mev(state, delta, adv, cfg));
    v.record("I(S, delta)", r.interference);
    if !in_unit_interval(&r.interference) {
        v.fail(format!("I = {} lies outside [0, 1]", r.interference), scenario_text(state, adv, delta), witnesses("full", &r));
    }
    Ok(v)
}

/// `I = 0` whenever Δ holds no wealth.
pub fn check_zero_wealth(
    state: &BlockchainState,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("zero_wealth");
    let wealth = state.wealth(delta)?;
    v.record("wealth(delta)", wealth);
    if !wealth.is_zero() {
        v.trials = 0;
        v.notes.push("delta holds wealth; the property is vacuous".into());
        return Ok(v);
    }
    let r = attempt!(v, mev(state, delta, adv, cfg));
    v.record("I", r.interference);
    if !r.interference.is_zero() {
        v.fail(format!("zero-wealth delta has I = {}", r.interference), scenario_text(state, adv, delta), witnesses("", &r));
    }
    Ok(v)
}

/// `I(S, Δ) ≤ I(S | Γ, Δ)` where `extra` is Γ.
pub fn check_context_monotonicity(
    state: &BlockchainState,
    extra: &BTreeMap<AccountId, ContractInstance>,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("context_monotonicity");
    let wider = compose(state, extra)?;
    let base = attempt!(v, mev(state, delta, adv, cfg));
    let widened = attempt!(v, mev(&wider, delta, adv, cfg));
    v.record("I(S, delta)", base.interference);
    v.record("I(S | extra, delta)", widened.interference);
    if base.interference > widened.interference {
        let mut w = witnesses("base", &base);
        w.extend(witnesses("widened", &widened));
        v.fail(
            format!("adding context lowered I from {} to {}", base.interference, widened.interference),
            scenario_text(&wider, adv, delta),
            w,
        );
    }
    Ok(v)
}

fn adversary_wallets_only(state: &BlockchainState, adv: &AdversaryModel) -> BlockchainState {
    let mut out = state.clone();
    for u in state.user_ids() {
        if !adv.accounts.contains(&u) {
            out.remove_user(&u);
        }
    }
    out
}

/// Interference and both local-MEV values are unchanged when every
/// non-adversary wallet is removed.
pub fn check_wallet_irrelevance(
    state: &BlockchainState,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("wallet_irrelevance");
    let stripped = adversary_wallets_only(state, adv);
    if stripped.user_ids().len() == state.user_ids().len() {
        v.notes.push("no non-adversary wallets; equality is vacuous".into());
    }
    let full = attempt!(v, mev(state, delta, adv, cfg));
    let bare = attempt!(v, mev(&stripped, delta, adv, cfg));
    v.record("I with all wallets", full.interference);
    v.record("I with adversary wallets", bare.interference);
    let same = full.interference == bare.interference
        && full.restricted.value == bare.restricted.value
        && full.unrestricted.value == bare.unrestricted.value;
    if !same {
        let mut w = witnesses("all wallets", &full);
        w.extend(witnesses("adversary wallets", &bare));
        v.fail(
            format!(
                "(restricted, unrestricted, I) changed from ({}, {}, {}) to ({}, {}, {})",
                full.restricted.value, full.unrestricted.value, full.interference,
                bare.restricted.value, bare.unrestricted.value, bare.interference
            ),
            scenario_text(state, adv, delta),
            w,
        );
    }
    Ok(v)
}

/// Semantic and declared agnosticism of every contract in `set`.
fn agnosticism(
    state: &BlockchainState,
    set: &BTreeSet<AccountId>,
    cfg: &HarnessConfig,
    name: &str,
) -> Result<Hypothesis, EngineError> {
    let mut failures = Vec::new();
    let mut trials = 0;
    for (i, c) in set.iter().enumerate() {
        let r = test_sender_agnostic(state, c, cfg.agnostic_trials, cfg.seed.wrapping_add(i as u64))?;
        trials += r.trials;
        if let Some(cx) = &r.counterexample {
            failures.push(format!("{c}: {cx}"));
        } else if !r.declared {
            failures.push(format!("{c} is declared identity-aware"));
        }
    }
    let detail = if failures.is_empty() {
        format!("no counterexample in {trials} sampled sender pairs")
    } else {
        failures.join("; ")
    };
    Ok(Hypothesis { name: name.to_string(), holds: failures.is_empty(), detail })
}

/// Token independence as a hypothesis. A bounded exploration that finds no
/// dependence counts as holding and is flagged in the detail.
fn independence(
    state: &BlockchainState,
    a: &BTreeSet<AccountId>,
    b: &BTreeSet<AccountId>,
    cfg: &HarnessConfig,
    name: &str,
) -> Result<Hypothesis, EngineError> {
    let (holds, fa, fb) = token_independent(state, a, b, cfg.flow_states)?;
    let show = |s: &BTreeSet<crate::model::TokenId>| {
        s.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
    };
    let mut detail = format!(
        "intok(A)={{{}}} outtok(A)={{{}}} intok(B)={{{}}} outtok(B)={{{}}}",
        show(&fa.intok),
        show(&fa.outtok),
        show(&fb.intok),
        show(&fb.outtok)
    );
    for f in [&fa, &fb] {
        if let Exploration::Bounded(_) = f.exploration {
            detail.push_str(&format!(" ({})", f.exploration));
        }
    }
    Ok(Hypothesis { name: name.to_string(), holds, detail })
}

/// Whether `a` and `b` are token independent. Independence found by a
/// bounded exploration is inconclusive; dependence is always definitive.
pub fn check_token_independence(
    state: &BlockchainState,
    a: &BTreeSet<AccountId>,
    b: &BTreeSet<AccountId>,
    max_states: usize,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("token_independence");
    let (holds, fa, fb) = token_independent(state, a, b, max_states)?;
    let join = |s: &BTreeSet<crate::model::TokenId>| s.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
    v.record("intok(a)", join(&fa.intok));
    v.record("outtok(a)", join(&fa.outtok));
    v.record("intok(b)", join(&fb.intok));
    v.record("outtok(b)", join(&fb.outtok));
    v.exhaustive = fa.exploration == Exploration::Exhaustive && fb.exploration == Exploration::Exhaustive;
    if !holds {
        v.status = Status::Violated;
        v.notes.push("a token flows out of one set and into the other".into());
    } else if !v.exhaustive {
        v.status = Status::Inconclusive;
        v.notes.push(format!("no shared flow found within {max_states} states"));
    }
    Ok(v)
}

/// `I(S, Δ) = I(S | Γ_adv, Δ)` under sender-agnosticism of `deps(Δ)` and
/// its token independence from the other contracts. When a hypothesis
/// fails the verdict holds and records whether equality happened anyway.
pub fn check_front_running_invariance(
    state: &BlockchainState,
    adv_contracts: &BTreeMap<AccountId, ContractInstance>,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("front_running_invariance");
    let wider = compose(state, adv_contracts)?;
    let deps_delta = wider.deps(delta)?;
    let rest: BTreeSet<AccountId> = wider.contract_ids().difference(&deps_delta).cloned().collect();
    v.hypotheses.push(agnosticism(&wider, &deps_delta, cfg, "deps(delta) sender-agnostic")?);
    v.hypotheses.push(independence(&wider, &deps_delta, &rest, cfg, "deps(delta) token independent of the rest")?);

    let base = attempt!(v, mev(state, delta, adv, cfg));
    let front = attempt!(v, mev(&wider, delta, adv, cfg));
    v.record("I(S, delta)", base.interference);
    v.record("I(S | adv, delta)", front.interference);
    let equal = base.interference == front.interference;
    v.record("equal", equal);
    if v.hypotheses_hold() {
        if !equal {
            let mut w = witnesses("base", &base);
            w.extend(witnesses("front-run", &front));
            v.fail(
                format!("hypotheses hold but I moved from {} to {}", base.interference, front.interference),
                scenario_text(&wider, adv, delta),
                w,
            );
        }
    } else {
        let failed: Vec<&str> = v.hypotheses.iter().filter(|h| !h.holds).map(|h| h.name.as_str()).collect();
        v.notes.push(format!(
            "hypothesis failed ({}); equality {}",
            failed.join(", "),
            if equal { "holds anyway" } else { "fails" }
        ));
    }
    Ok(v)
}

/// Basic local-MEV properties for targets C and callees D, invariance under
/// removal of non-adversary wallets, and invariance under widening by
/// `widening` (contracts D cannot reach).
pub fn check_mev_lemmas(
    state: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    callees: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    widening: &BTreeMap<AccountId, ContractInstance>,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("mev_lemmas");
    let none = BTreeSet::new();
    let scenario = || local_text(state, adv, targets, callees);
    let one = |label: &str, l: &Lmev| vec![(label.to_string(), l.witness.clone())];

    let base = attempt!(v, local(state, callees, targets, adv, cfg));
    v.record("lmev_D(S, C)", base.value);

    // Nothing to attack, and nothing to call.
    let no_targets = attempt!(v, local(state, callees, &none, adv, cfg));
    let no_callees = attempt!(v, local(state, &none, targets, adv, cfg));
    if !no_targets.value.is_zero() || !no_callees.value.is_zero() {
        v.fail(
            format!("empty targets give {}, empty callees give {}", no_targets.value, no_callees.value),
            scenario(),
            [one("no targets", &no_targets), one("no callees", &no_callees)].concat(),
        );
    }

    // More callees never hurt the adversary.
    let all = state.contract_ids();
    let wide = attempt!(v, local(state, &all, targets, adv, cfg));
    v.record("lmev_all(S, C)", wide.value);
    if wide.value < base.value {
        v.fail(format!("widening callees to all contracts lowered lmev from {} to {}", base.value, wide.value), scenario(), one("D", &base));
    }

    // Callees outside the state change nothing.
    let mut ghosted = callees.clone();
    ghosted.insert(AccountId::contract("__absent__"));
    let ghost = attempt!(v, local(state, &ghosted, targets, adv, cfg));
    if ghost.value != base.value {
        v.fail(format!("an absent callee changed lmev from {} to {}", base.value, ghost.value), scenario(), one("ghost", &ghost));
    }

    let wealth = state.wealth(targets)?;
    v.record("wealth(C)", wealth);
    if base.value < int(0) || base.value > wealth {
        v.fail(format!("lmev {} lies outside [0, {wealth}]", base.value), scenario(), one("D", &base));
    }

    let bare = adversary_wallets_only(state, adv);
    let bare_l = attempt!(v, local(&bare, callees, targets, adv, cfg));
    if bare_l.value != base.value {
        v.fail(
            format!("removing bystander wallets changed lmev from {} to {}", base.value, bare_l.value),
            scenario(),
            [one("all wallets", &base), one("adversary wallets", &bare_l)].concat(),
        );
    }

    if !widening.is_empty() {
        let wider = compose(state, widening)?;
        let widened = attempt!(v, local(&wider, callees, targets, adv, cfg));
        v.record("lmev_D(S | extra, C)", widened.value);
        let in_state = callees.iter().all(|c| state.contract(c).is_some());
        // Monotone always; equal when every callee already lives in S.
        if widened.value < base.value || (in_state && widened.value != base.value) {
            v.fail(
                format!("widening moved lmev from {} to {}", base.value, widened.value),
                local_text(&wider, adv, targets, callees),
                [one("narrow", &base), one("wide", &widened)].concat(),
            );
        }
    }
    Ok(v)
}

/// Compares `lmev_D(S, C)` with `lmev_{D ∩ deps(C)}(S, C)` and checks the
/// three stripping hypotheses. Preservation is required only when all of
/// them hold.
pub fn check_stripping_lemma(
    state: &BlockchainState,
    targets: &BTreeSet<AccountId>,
    callees: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    cfg: &HarnessConfig,
) -> Result<PropertyVerdict, EngineError> {
    let mut v = PropertyVerdict::new("contract_stripping");
    let deps_c = state.deps(targets)?;
    let present: BTreeSet<AccountId> = callees.iter().filter(|c| state.contract(c).is_some()).cloned().collect();
    let deps_d = state.deps(&present)?;
    let stripped: BTreeSet<AccountId> = callees.intersection(&deps_c).cloned().collect();
    let outside: BTreeSet<AccountId> = present.difference(&deps_c).cloned().collect();
    let bridge: BTreeSet<AccountId> = deps_c.intersection(&state.deps(&outside)?).cloned().collect();

    v.hypotheses.push(agnosticism(state, &bridge, cfg, "bridge contracts sender-agnostic")?);
    let missing: Vec<String> = bridge.difference(callees).map(|c| c.to_string()).collect();
    v.hypotheses.push(Hypothesis {
        name: "bridge contracts callable".into(),
        holds: missing.is_empty(),
        detail: if missing.is_empty() { "every bridge contract is in D".into() } else { format!("not in D: {}", missing.join(", ")) },
    });
    let shared: BTreeSet<AccountId> = deps_d.intersection(&deps_c).cloned().collect();
    let private: BTreeSet<AccountId> = deps_d.difference(&deps_c).cloned().collect();
    v.hypotheses.push(independence(state, &shared, &private, cfg, "token independence of the parts")?);

    let full = attempt!(v, local(state, callees, targets, adv, cfg));
    let cut = attempt!(v, local(state, &stripped, targets, adv, cfg));
    v.record("lmev_D", full.value);
    v.record("lmev_stripped", cut.value);
    let preserved = full.value == cut.value;
    v.record("preserved", preserved);
    if v.hypotheses_hold() {
        if !preserved {
            v.fail(
                format!("hypotheses hold but stripping lowered lmev from {} to {}", full.value, cut.value),
                local_text(state, adv, targets, callees),
                vec![("D".into(), full.witness.clone()), ("stripped".into(), cut.witness.clone())],
            );
        }
    } else {
        let failed: Vec<&str> = v.hypotheses.iter().filter(|h| !h.holds).map(|h| h.name.as_str()).collect();
        v.notes.push(format!(
            "hypothesis failed ({}); preservation {}",
            failed.join(", "),
            if preserved { "holds anyway" } else { "fails" }
        ));
    }
    Ok(v)
}

/// The stripping check on one of the four fixture systems.
pub fn check_stripping(system: FixtureSystem, cfg: &HarnessConfig) -> Result<PropertyVerdict, EngineError> {
    let fx = system.build()?;
    let adv = AdversaryModel::single(&fx.adversary);
    let mut v = check_stripping_lemma(&fx.state, &fx.targets, &fx.callees, &adv, cfg)?;
    v.property = format!("contract_stripping[{}]", system.name());
    Ok(v)
}
