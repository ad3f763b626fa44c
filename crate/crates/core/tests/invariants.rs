use std::collections::BTreeSet;

use proptest::prelude::*;

use mevlab_core::contracts::ContractKind;
use mevlab_core::engine::{craftable, gain, lmev, CraftPolicy, EngineError, SearchBudget};
use mevlab_core::harness::random::generate;
use mevlab_core::model::{AccountId, BlockchainState, Transaction};
use mevlab_core::oracles::{lp_borrowable, lp_optimal_x};
use mevlab_core::presets;
use mevlab_core::rational::{self, frac, int, Rational};
use mevlab_core::vm::{self, Outcome};

/// Walks `choices.len()` steps from a generated state, picking each
/// transaction among every craftable one by index.
fn walk(seed: u64, index: usize, choices: &[usize]) -> (BlockchainState, Vec<Transaction>) {
    let case = generate(seed, index, false);
    let mut state = case.state.clone();
    let mut txs = Vec::new();
    for c in choices {
        let cands = craftable(&state, &CraftPolicy::unrestricted(), &case.adversary, false, 4).unwrap();
        if cands.is_empty() {
            break;
        }
        let tx = cands[c % cands.len()].clone();
        state = vm::execute(&state, &tx).unwrap().state;
        txs.push(tx);
    }
    (state, txs)
}

fn product(s: &BlockchainState, amm: &AccountId) -> Option<u128> {
    match s.contract(amm)?.kind.as_ref() {
        ContractKind::Amm { t0, t1 } => Some(s.balance(amm, t0) as u128 * s.balance(amm, t1) as u128),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn supply_is_conserved(seed in 0u64..1000, index in 0usize..50, choices in prop::collection::vec(any::<usize>(), 0..8)) {
        let start = generate(seed, index, false).state;
        let (end, _) = walk(seed, index, &choices);
        prop_assert_eq!(end.current_totals(), start.current_totals());
        prop_assert!(end.check_well_formed().is_ok());
    }

    #[test]
    fn reverts_change_nothing_and_runs_repeat(seed in 0u64..1000, index in 0usize..50, choices in prop::collection::vec(any::<usize>(), 1..6)) {
        let (state, _) = walk(seed, index, &choices[1..]);
        let adv = generate(seed, index, false).adversary;
        let cands = craftable(&state, &CraftPolicy::unrestricted(), &adv, false, 4).unwrap();
        prop_assume!(!cands.is_empty());
        let tx = &cands[choices[0] % cands.len()];
        let a = vm::execute(&state, tx).unwrap();
        let b = vm::execute(&state, tx).unwrap();
        prop_assert_eq!(&a.state, &b.state);
        prop_assert_eq!(&a.trace, &b.trace);
        if let Outcome::Reverted(_) = a.trace.outcome {
            prop_assert_eq!(&a.state, &state);
        }
    }

    #[test]
    fn wealth_is_additive(seed in 0u64..1000, index in 0usize..50, mask in any::<u32>()) {
        let s = generate(seed, index, false).state;
        let all: Vec<AccountId> = s.contract_ids().into_iter().collect();
        let (left, right): (Vec<_>, Vec<_>) = all.iter().enumerate().partition(|(i, _)| mask >> (i % 32) & 1 == 1);
        let left: BTreeSet<AccountId> = left.into_iter().map(|(_, a)| a.clone()).collect();
        let right: BTreeSet<AccountId> = right.into_iter().map(|(_, a)| a.clone()).collect();
        let whole: BTreeSet<AccountId> = all.into_iter().collect();
        prop_assert_eq!(s.wealth(&left).unwrap() + s.wealth(&right).unwrap(), s.wealth(&whole).unwrap());
    }

    #[test]
    fn deps_closure_laws(seed in 0u64..1000, index in 0usize..50, mask in any::<u32>()) {
        let s = generate(seed, index, false).state;
        let ids: Vec<AccountId> = s.contract_ids().into_iter().collect();
        let roots: BTreeSet<AccountId> = ids.iter().enumerate().filter(|(i, _)| mask >> (i % 32) & 1 == 1).map(|(_, a)| a.clone()).collect();
        let closed = s.deps(&roots).unwrap();
        prop_assert!(roots.is_subset(&closed));
        prop_assert_eq!(s.deps(&closed).unwrap(), closed.clone());
        let bigger: BTreeSet<AccountId> = roots.iter().cloned().chain(ids.first().cloned()).collect();
        prop_assert!(closed.is_subset(&s.deps(&bigger).unwrap()));
    }

    #[test]
    fn amm_product_never_drops(r0 in 1u64..30, r1 in 1u64..30, choices in prop::collection::vec(any::<usize>(), 1..6)) {
        let p = presets::amm_bet(r0, r1, 2, 20, int(1)).unwrap();
        let amm = AccountId::contract("AMM");
        let policy = CraftPolicy::only([amm.clone()]);
        let mut s = p.state.clone();
        for c in choices {
            let cands = craftable(&s, &policy, &p.adversary, true, 0).unwrap();
            if cands.is_empty() {
                break;
            }
            let before = product(&s, &amm).unwrap();
            s = vm::execute(&s, &cands[c % cands.len()]).unwrap().state;
            prop_assert!(product(&s, &amm).unwrap() >= before);
        }
    }

    #[test]
    fn lmev_is_bounded_and_witnessed(seed in 0u64..1000, index in 0usize..50) {
        let case = generate(seed, index, false);
        let budget = SearchBudget { max_states: 5_000, ..SearchBudget::exact() };
        match lmev(&case.state, &case.delta, &CraftPolicy::only(case.callees.iter().cloned()), &case.adversary, &budget) {
            Ok(l) => {
                prop_assert!(l.value >= int(0));
                prop_assert!(l.value <= case.state.wealth(&case.delta).unwrap());
                prop_assert_eq!(-gain(&case.delta, &case.state, &l.witness).unwrap(), l.value);
                prop_assert!(l.witness.iter().all(|tx| case.callees.contains(&tx.callee)));
            }
            Err(EngineError::Incomplete { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn lp_optimal_swap_maximises_borrowing(n in 0i128..200, r in 1i128..200, steps in 1i128..40) {
        let (n, r, cmin) = (int(n), int(r), frac(3, 2));
        let best = lp_optimal_x(n, r).unwrap();
        prop_assert!(best >= int(0) && best <= n);
        let top = lp_borrowable(n, r, cmin, best).unwrap();
        for k in 0..=steps {
            let x = n * Rational::new(k, steps);
            prop_assert!(lp_borrowable(n, r, cmin, x).unwrap() <= top);
        }
    }

    #[test]
    fn rationals_render_and_parse_back(num in -10_000i128..10_000, den in 1i128..500) {
        let q = Rational::new(num, den);
        prop_assert_eq!(rational::parse(&rational::render(&q)).unwrap(), q);
    }
}
