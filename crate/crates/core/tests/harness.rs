use std::collections::BTreeSet;

use mevlab_core::contracts::{ContractKind, FixtureSystem};
use mevlab_core::harness::random::{generate, run_suites, SuiteConfig, SUITE_PROPERTIES};
use mevlab_core::harness::{self, compute_token_flows, test_sender_agnostic, token_independent, HarnessConfig, Status};
use mevlab_core::model::{AccountId, TokenId};
use mevlab_core::presets;
use mevlab_core::rational::int;

fn ids(names: &[&str]) -> BTreeSet<AccountId> {
    names.iter().map(|n| AccountId::contract(n)).collect()
}

#[test]
fn stripping_fixtures_hold() {
    let cfg = HarnessConfig::default();
    for system in FixtureSystem::ALL {
        let v = harness::check_stripping(system, &cfg).unwrap();
        assert_ne!(v.status, Status::Violated, "{system}: {:?}", v.counterexample);
    }
}

#[test]
fn token_dependence_flows() {
    let f = FixtureSystem::TokenDependence.build().unwrap();
    let t = BTreeSet::from([TokenId::new("T")]);
    let low = compute_token_flows(&f.state, &ids(&["C0", "C1"]), 100_000).unwrap();
    let high = compute_token_flows(&f.state, &ids(&["C2", "C3"]), 100_000).unwrap();
    assert_eq!(low.intok, t);
    assert_eq!(low.outtok, t);
    assert!(high.intok.is_empty());
    assert_eq!(high.outtok, t);
    let (independent, _, _) = token_independent(&f.state, &ids(&["C0", "C1"]), &ids(&["C2", "C3"]), 100_000).unwrap();
    assert!(!independent);
}

#[test]
fn empty_subset_has_no_flows() {
    let p = presets::airdrop(3).unwrap();
    let f = compute_token_flows(&p.state, &BTreeSet::new(), 10).unwrap();
    assert!(f.intok.is_empty() && f.outtok.is_empty());
}

#[test]
fn sender_agnosticism_is_detected() {
    let f = FixtureSystem::SenderAgnosticism.build().unwrap();
    let c0 = test_sender_agnostic(&f.state, &AccountId::contract("C0"), 200, 1).unwrap();
    assert!(!c0.agnostic);
    assert!(c0.counterexample.is_some());
    let p = presets::airdrop(4).unwrap();
    let airdrop = test_sender_agnostic(&p.state, &AccountId::contract("Airdrop"), 200, 1).unwrap();
    assert!(airdrop.agnostic);
}

#[test]
fn airdrop_properties_hold() {
    let p = presets::airdrop(5).unwrap();
    let cfg = HarnessConfig::default();
    let adv = &p.adversary;
    for v in [
        harness::check_basic_interference(&p.state, &p.delta, adv, &cfg).unwrap(),
        harness::check_zero_wealth(&p.state, &p.delta, adv, &cfg).unwrap(),
        harness::check_wallet_irrelevance(&p.state, &p.delta, adv, &cfg).unwrap(),
    ] {
        assert_eq!(v.status, Status::Holds, "{}", v.property);
    }
}

#[test]
fn tight_budget_is_inconclusive_not_violated() {
    let p = presets::amm_bet(10, 10, 4, 14, int(4)).unwrap();
    let mut cfg = HarnessConfig::default();
    cfg.budget.max_states = 3;
    let v = harness::check_basic_interference(&p.state, &p.delta, &p.adversary, &cfg).unwrap();
    assert_eq!(v.status, Status::Inconclusive);
    assert!(!v.notes.is_empty());
}

#[test]
fn random_suite_finds_no_violation() {
    let cfg = SuiteConfig { cases: 10, seed: 7, ..SuiteConfig::default() };
    let verdicts = run_suites(&cfg).unwrap();
    assert_eq!(verdicts.len(), SUITE_PROPERTIES.len());
    for v in &verdicts {
        assert_ne!(v.status, Status::Violated, "{}: {:?}", v.property, v.counterexample);
    }
}

#[test]
fn generation_and_suites_are_deterministic() {
    assert_eq!(generate(3, 5, false).state, generate(3, 5, false).state);
    let cfg = SuiteConfig { cases: 4, seed: 11, ..SuiteConfig::default() };
    assert_eq!(run_suites(&cfg).unwrap(), run_suites(&cfg).unwrap());
}

#[test]
fn zero_delta_cases_hold_nothing_outside_amms() {
    for i in 0..8 {
        let c = generate(5, i, true);
        let funded: BTreeSet<AccountId> = c
            .delta
            .iter()
            .filter(|id| !matches!(c.state.contract(id).unwrap().kind.as_ref(), ContractKind::Amm { .. }))
            .cloned()
            .collect();
        assert_eq!(c.state.wealth(&funded).unwrap(), int(0), "case {i}");
    }
}
