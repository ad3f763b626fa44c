use mevlab_core::contracts::{max_borrow, FixtureSystem};
use mevlab_core::model::{AccountId, Transaction, Value};
use mevlab_core::presets::{self, eth, m, owner, t};
use mevlab_core::rational::{frac, int};
use mevlab_core::vm;

fn committed(state: &mevlab_core::model::BlockchainState, tx: &Transaction) -> bool {
    vm::execute(state, tx).unwrap().trace.committed()
}

#[test]
fn exchange_pays_at_its_rate() {
    let p = presets::airdrop_exchange(5, 0, 100, int(2)).unwrap();
    let ex = AccountId::contract("Exchange");
    let out = vm::execute(&p.state, &Transaction::new(&m(), &ex, "swap").pay(5, &t())).unwrap();
    assert!(out.trace.committed());
    assert_eq!(out.state.balance(&m(), &eth()), 10);
}

#[test]
fn only_the_owner_sets_the_rate() {
    let p = presets::airdrop_exchange(5, 0, 100, int(2)).unwrap();
    let ex = AccountId::contract("Exchange");
    let set = |who: &AccountId| Transaction::new(who, &ex, "setRate").arg(Value::Rat(int(3)));
    assert!(!committed(&p.state, &set(&m())));
    assert!(committed(&p.state, &set(&owner())));
}

#[test]
fn fee_rate_stays_a_percentage() {
    let p = presets::airdrop_fee(10, 5).unwrap();
    let fm = AccountId::contract("FeeManager");
    assert!(committed(&p.state, &Transaction::new(&m(), &fm, "setFee").arg(Value::Int(100))));
    assert!(!committed(&p.state, &Transaction::new(&m(), &fm, "setFee").arg(Value::Int(101))));
    assert!(!committed(&p.state, &Transaction::new(&m(), &fm, "setFee").arg(Value::Int(-1))));
}

#[test]
fn lp_borrow_respects_collateral_ratio() {
    let p = presets::amm_lp(20, 10, frac(3, 2), 150).unwrap();
    let lp = AccountId::contract("LP");
    let s = vm::execute(&p.state, &Transaction::new(&m(), &lp, "deposit").pay(15, &eth())).unwrap().state;
    let cap = max_borrow(&s, &lp, &m(), &t()).unwrap();
    assert_eq!(cap, 10);
    let borrow = |x: u64| Transaction::new(&m(), &lp, "borrow").arg(Value::Int(x as i128)).arg(Value::Token(t()));
    assert!(committed(&s, &borrow(cap)));
    assert!(!committed(&s, &borrow(cap + 1)));
}

#[test]
fn declared_sender_agnosticism() {
    for (p, id, agnostic) in [
        (presets::airdrop(1).unwrap().state, "Airdrop", true),
        (presets::doubler(false).unwrap().state, "Doubler", true),
        (presets::airdrop_exchange(1, 1, 1, int(1)).unwrap().state, "Exchange", false),
    ] {
        assert_eq!(p.contract(&AccountId::contract(id)).unwrap().declared_sender_agnostic, agnostic, "{id}");
    }
    let sender = FixtureSystem::SenderAgnosticism.build().unwrap();
    assert!(!sender.state.contract(&AccountId::contract("C0")).unwrap().declared_sender_agnostic);
}

#[test]
fn fixtures_build_well_formed() {
    for system in FixtureSystem::ALL {
        let f = system.build().unwrap();
        assert!(f.state.check_well_formed().is_ok(), "{system}");
        assert_eq!(system.name().parse::<FixtureSystem>().unwrap(), system);
    }
}
