use mevlab_core::contracts::{deploy, ContractKind};
use mevlab_core::model::{AccountId, BlockchainState, ContractInstance, Environment, PriceTable, TokenId, Transaction, Value, Wallet};
use mevlab_core::presets::{self, eth, m, owner, t};
use mevlab_core::rational::int;
use mevlab_core::vm::{self, ExecutionEvent, Fault, Outcome};

fn withdraw(x: i128) -> Transaction {
    Transaction::new(&m(), &AccountId::contract("Airdrop"), "withdraw").arg(Value::Int(x))
}

#[test]
fn airdrop_withdraw_commits() {
    let s = presets::airdrop(5).unwrap().state;
    let ex = vm::execute(&s, &withdraw(3)).unwrap();
    assert!(ex.trace.committed());
    assert_eq!(ex.state.balance(&AccountId::contract("Airdrop"), &t()), 2);
    assert_eq!(ex.state.balance(&m(), &t()), 3);
}

#[test]
fn airdrop_overdraw_reverts_unchanged() {
    let s = presets::airdrop(5).unwrap().state;
    let ex = vm::execute(&s, &withdraw(6)).unwrap();
    assert!(matches!(ex.trace.outcome, Outcome::Reverted(_)));
    assert_eq!(ex.state, s);
}

#[test]
fn amm_swap_floors_output() {
    let s = presets::amm_bet(10, 10, 4, 14, int(1)).unwrap().state;
    let amm = AccountId::contract("AMM");
    let tx = Transaction::new(&m(), &amm, "swap").arg(Value::Int(0)).pay(14, &eth());
    let ex = vm::execute(&s, &tx).unwrap();
    assert!(ex.trace.committed());
    assert_eq!(ex.state.balance(&amm, &eth()), 24);
    assert_eq!(ex.state.balance(&amm, &t()), 5);
    assert_eq!(ex.state.balance(&m(), &t()), 5);
}

#[test]
fn empty_sequence_is_identity() {
    let s = presets::airdrop(5).unwrap().state;
    let (after, traces) = vm::execute_sequence(&s, &[]).unwrap();
    assert_eq!(after, s);
    assert!(traces.is_empty());
}

#[test]
fn sequence_continues_after_revert() {
    let s = presets::airdrop(5).unwrap().state;
    let (after, traces) = vm::execute_sequence(&s, &[withdraw(6), withdraw(2)]).unwrap();
    assert!(!traces[0].committed());
    assert!(traces[1].committed());
    assert_eq!(after.balance(&AccountId::contract("Airdrop"), &t()), 3);
}

#[test]
fn zero_transfer_is_noop_commit() {
    let s = presets::airdrop(5).unwrap().state;
    let ex = vm::execute(&s, &withdraw(0)).unwrap();
    assert!(ex.trace.committed());
    assert_eq!(ex.state, s);
}

#[test]
fn fee_split_between_sender_and_owner() {
    let s = presets::airdrop_fee(100, 1).unwrap().state;
    let tx = Transaction::new(&m(), &AccountId::contract("AirdropFee"), "withdraw").arg(Value::Int(100));
    let ex = vm::execute(&s, &tx).unwrap();
    assert!(ex.trace.committed());
    assert_eq!(ex.state.balance(&m(), &t()), 99);
    assert_eq!(ex.state.balance(&owner(), &t()), 1);
}

#[test]
fn unknown_function_and_bad_arity_revert() {
    let s = presets::airdrop(5).unwrap().state;
    let airdrop = AccountId::contract("Airdrop");
    for tx in [Transaction::new(&m(), &airdrop, "steal"), Transaction::new(&m(), &airdrop, "withdraw")] {
        let ex = vm::execute(&s, &tx).unwrap();
        assert!(!ex.trace.committed());
        assert_eq!(ex.state, s);
    }
}

#[test]
fn contract_signer_is_a_fault() {
    let s = presets::airdrop(5).unwrap().state;
    let airdrop = AccountId::contract("Airdrop");
    let tx = Transaction::new(&airdrop, &airdrop, "withdraw").arg(Value::Int(1));
    assert!(matches!(vm::execute(&s, &tx), Err(Fault::SignerNotUser(_))));
}

#[test]
fn internal_calls_are_traced_with_contract_sender() {
    let s = presets::airdrop_fee(10, 50).unwrap().state;
    let tx = Transaction::new(&m(), &AccountId::contract("AirdropFee"), "withdraw").arg(Value::Int(10));
    let ex = vm::execute(&s, &tx).unwrap();
    let inner = ex.trace.events.iter().any(|e| {
        matches!(e, ExecutionEvent::Call { sender, callee, .. }
            if *sender == AccountId::contract("AirdropFee") && *callee == AccountId::contract("FeeManager"))
    });
    assert!(inner);
}

#[test]
fn execution_is_deterministic() {
    let s = presets::amm_bet(10, 10, 4, 14, int(4)).unwrap().state;
    let tx = Transaction::new(&m(), &AccountId::contract("AMM"), "swap").arg(Value::Int(0)).pay(10, &eth());
    let a = vm::execute(&s, &tx).unwrap();
    let b = vm::execute(&s, &tx).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn underpaid_payment_reverts() {
    let tok = TokenId::new("T");
    let prices = PriceTable::new().with(&tok, int(1)).unwrap();
    let mut s = BlockchainState::new(prices, Environment::default()).with_user(m(), Wallet::of(&[(1, &tok)])).unwrap();
    deploy(&mut s, AccountId::contract("D"), ContractInstance::new(ContractKind::Doubler { token: tok.clone() }, Wallet::new()))
        .unwrap();
    let tx = Transaction::new(&m(), &AccountId::contract("D"), "fund").pay(2, &tok);
    let ex = vm::execute(&s, &tx).unwrap();
    assert!(!ex.trace.committed());
    assert_eq!(ex.state, s);
}
