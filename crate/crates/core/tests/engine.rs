use std::collections::BTreeSet;

use mevlab_core::engine::{self, gain, interference, lmev, CraftPolicy, EngineError, Hints, SearchBudget};
use mevlab_core::model::AccountId;
use mevlab_core::presets::{self, m};
use mevlab_core::rational::{frac, int};

fn ids(names: &[&str]) -> BTreeSet<AccountId> {
    names.iter().map(|n| AccountId::contract(n)).collect()
}

#[test]
fn airdrop_loses_everything_and_witness_replays() {
    let p = presets::airdrop(10).unwrap();
    let r = interference(&p.state, &p.delta, &p.adversary, &SearchBudget::exact(), &Hints::default()).unwrap();
    assert_eq!(r.unrestricted.value, int(10));
    assert_eq!(r.restricted.value, int(10));
    assert_eq!(r.interference, int(0));
    for l in [&r.restricted, &r.unrestricted] {
        assert_eq!(-gain(&p.delta, &p.state, &l.witness).unwrap(), l.value);
        assert!(l.witness.iter().all(|tx| tx.signer == m()));
    }
}

#[test]
fn empty_targets_have_no_mev() {
    let p = presets::airdrop(10).unwrap();
    let l = lmev(&p.state, &BTreeSet::new(), &CraftPolicy::unrestricted(), &p.adversary, &SearchBudget::exact()).unwrap();
    assert_eq!(l.value, int(0));
    assert!(l.witness.is_empty());
}

#[test]
fn no_callees_means_no_mev() {
    let p = presets::airdrop(10).unwrap();
    let l = lmev(&p.state, &p.delta, &CraftPolicy::only([]), &p.adversary, &SearchBudget::exact()).unwrap();
    assert_eq!(l.value, int(0));
}

#[test]
fn widening_callees_never_lowers_mev() {
    let p = presets::doubler(true).unwrap();
    let b = SearchBudget::exact();
    let narrow = lmev(&p.state, &p.delta, &CraftPolicy::only(ids(&["Doubler"])), &p.adversary, &b).unwrap();
    let wide = lmev(&p.state, &p.delta, &CraftPolicy::only(ids(&["Doubler", "Airdrop"])), &p.adversary, &b).unwrap();
    assert_eq!(narrow.value, int(0));
    assert_eq!(wide.value, int(2));
    assert!(narrow.value <= wide.value);
}

#[test]
fn heuristic_never_exceeds_exact() {
    let p = presets::amm_bet(10, 10, 4, 14, int(4)).unwrap();
    let exact = interference(&p.state, &p.delta, &p.adversary, &SearchBudget::exact(), &Hints::default()).unwrap();
    let heur = interference(&p.state, &p.delta, &p.adversary, &SearchBudget::heuristic(), &Hints::default()).unwrap();
    assert!(heur.unrestricted.lower_bound);
    assert!(heur.unrestricted.value <= exact.unrestricted.value);
    assert!(heur.restricted.value <= exact.restricted.value);
    assert_eq!(-gain(&p.delta, &p.state, &heur.unrestricted.witness).unwrap(), heur.unrestricted.value);
}

#[test]
fn exact_search_reports_budget_overrun() {
    let p = presets::amm_bet(10, 10, 4, 14, int(4)).unwrap();
    let tiny = SearchBudget { max_states: 5, ..SearchBudget::exact() };
    let err = lmev(&p.state, &p.delta, &CraftPolicy::unrestricted(), &p.adversary, &tiny).unwrap_err();
    assert!(matches!(err, EngineError::Incomplete { limit: 5, .. }));
}

#[test]
fn exact_search_refuses_large_supply() {
    let p = presets::airdrop(300).unwrap();
    let err = lmev(&p.state, &p.delta, &CraftPolicy::unrestricted(), &p.adversary, &SearchBudget::exact()).unwrap_err();
    assert!(matches!(err, EngineError::SupplyTooLarge { supply: 300, .. }));
}

#[test]
fn heuristic_handles_large_supply() {
    let p = presets::airdrop(300).unwrap();
    let l = lmev(&p.state, &p.delta, &CraftPolicy::unrestricted(), &p.adversary, &SearchBudget::heuristic()).unwrap();
    assert_eq!(l.value, int(300));
}

#[test]
fn user_target_is_rejected() {
    let p = presets::airdrop(3).unwrap();
    let targets = BTreeSet::from([m()]);
    let err = lmev(&p.state, &targets, &CraftPolicy::unrestricted(), &p.adversary, &SearchBudget::exact()).unwrap_err();
    assert!(matches!(err, EngineError::BadTarget(_)));
}

#[test]
fn adversary_must_be_users() {
    assert!(matches!(engine::AdversaryModel::new([]), Err(EngineError::NoAdversary)));
    assert!(matches!(
        engine::AdversaryModel::new([AccountId::contract("Airdrop")]),
        Err(EngineError::BadAdversary(_))
    ));
}

#[test]
fn interference_ratio_edges() {
    assert_eq!(engine::interference_ratio(&int(0), &int(0)), int(0));
    assert_eq!(engine::interference_ratio(&int(3), &int(4)), frac(1, 4));
    assert_eq!(engine::interference_ratio(&int(4), &int(4)), int(0));
}

#[test]
fn searches_are_deterministic() {
    let p = presets::airdrop_exchange(2, 3, 20, int(2)).unwrap();
    let b = SearchBudget::exact();
    let a = interference(&p.state, &p.delta, &p.adversary, &b, &Hints::default()).unwrap();
    let c = interference(&p.state, &p.delta, &p.adversary, &b, &Hints::default()).unwrap();
    assert_eq!(a, c);
}
