//! Executable behaviors of the built-in contract kinds.

mod amm;
mod bet;
mod exchange;
pub mod fixture;
mod lp;
mod simple;

use std::collections::{BTreeSet, BTreeMap};
use std::fmt;

use crate::model::{AccountId, Amount, BlockchainState, ContractInstance, ModelError, Storage, TokenId, Value};
use crate::rational::Rational;
use crate::vm::{self, revert, Frame, Step};

pub use fixture::{FixtureSystem, Op, Script};
pub use lp::max_borrow;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ContractKind {
    Airdrop { token: TokenId },
    FeeManager { owner: AccountId, fee_rate: i128 },
    AirdropFee { token: TokenId, fee_manager: AccountId },
    Exchange { tin: TokenId, tout: TokenId, rate: Rational, owner: AccountId },
    Amm { t0: TokenId, t1: TokenId },
    Bet { oracle: AccountId, native: TokenId, token: TokenId, deadline: u64, rate: Rational, owner: AccountId },
    Lp { oracle: AccountId, cmin: Rational },
    Doubler { token: TokenId },
    Fixture(Script),
}

impl ContractKind {
    pub fn name(&self) -> &'static str {
        match self {
            ContractKind::Airdrop { .. } => "airdrop",
            ContractKind::FeeManager { .. } => "fee_manager",
            ContractKind::AirdropFee { .. } => "airdrop_fee",
            ContractKind::Exchange { .. } => "exchange",
            ContractKind::Amm { .. } => "amm",
            ContractKind::Bet { .. } => "bet",
            ContractKind::Lp { .. } => "lp",
            ContractKind::Doubler { .. } => "doubler",
            ContractKind::Fixture(_) => "fixture",
        }
    }

    /// Contracts this kind may call.
    pub fn references(&self) -> BTreeSet<AccountId> {
        match self {
            ContractKind::AirdropFee { fee_manager, .. } => [fee_manager.clone()].into(),
            ContractKind::Bet { oracle, .. } | ContractKind::Lp { oracle, .. } => [oracle.clone()].into(),
            ContractKind::Fixture(s) => s.call_targets(),
            _ => BTreeSet::new(),
        }
    }

    pub fn initial_storage(&self) -> Storage {
        let mut s = Storage::new();
        match self {
            ContractKind::FeeManager { owner, fee_rate } => {
                s.insert("owner".into(), Value::Account(owner.clone()));
                s.insert("feeRate".into(), Value::Int(*fee_rate));
            }
            ContractKind::Exchange { rate, owner, .. } => {
                s.insert("rate".into(), Value::Rat(*rate));
                s.insert("owner".into(), Value::Account(owner.clone()));
            }
            ContractKind::Bet { .. } => {
                s.insert("player".into(), Value::Null);
                s.insert("potShare".into(), Value::Null);
            }
            ContractKind::Lp { .. } => {
                s.insert("minted".into(), Value::Map(BTreeMap::new()));
                s.insert("debts".into(), Value::Map(BTreeMap::new()));
            }
            _ => {}
        }
        s
    }

    /// Storage keys a scenario may override.
    pub fn storage_keys(&self) -> &'static [&'static str] {
        match self {
            ContractKind::FeeManager { .. } => &["owner", "feeRate"],
            ContractKind::Exchange { .. } => &["rate", "owner"],
            ContractKind::Bet { .. } => &["player", "potShare"],
            ContractKind::Lp { .. } => &["minted", "debts"],
            _ => &[],
        }
    }

    /// Whether the kind only uses the caller's identity as a transfer
    /// recipient. Owner and player checks, and per-sender collateral, make a
    /// kind identity-aware.
    pub fn declared_sender_agnostic(&self) -> bool {
        match self {
            ContractKind::Exchange { .. } | ContractKind::Bet { .. } | ContractKind::Lp { .. } => false,
            ContractKind::Fixture(s) => !s.checks_sender(),
            _ => true,
        }
    }

    /// Constructor requirements, checked against the state the instance has
    /// been deployed into.
    pub fn check_constructor(&self, me: &AccountId, state: &BlockchainState) -> Result<(), String> {
        let wallet = state.wallet(me).cloned().unwrap_or_default();
        match self {
            ContractKind::FeeManager { .. } => {
                let r = state.contract(me).and_then(|c| c.get("feeRate")).and_then(Value::as_int);
                match r {
                    Some(r) if (0..=100).contains(&r) => Ok(()),
                    _ => Err("feeRate must be an integer in 0..=100".into()),
                }
            }
            ContractKind::Exchange { tin, tout, rate, .. } => {
                if *rate <= Rational::from_integer(0) {
                    Err("rate must be positive".into())
                } else if tin == tout {
                    Err("tin and tout must differ".into())
                } else {
                    Ok(())
                }
            }
            ContractKind::Amm { t0, t1 } => {
                if t0 == t1 {
                    Err("AMM tokens must differ".into())
                } else if wallet.balance(t0) == 0 || wallet.balance(t1) == 0 {
                    Err("AMM reserves must both be positive".into())
                } else {
                    Ok(())
                }
            }
            ContractKind::Bet { oracle, native, token, .. } => {
                if token == native {
                    return Err("bet token must differ from the native token".into());
                }
                let tokens = vm::view(state, me, oracle, "getTokens", &[]).map_err(|e| e.to_string())?;
                let expect = Value::pair(Value::Token(native.clone()), Value::Token(token.clone()));
                if tokens.as_ref() == Some(&expect) {
                    Ok(())
                } else {
                    Err(format!("oracle {oracle} does not trade ({native}, {token})"))
                }
            }
            ContractKind::Lp { cmin, oracle } => {
                if *cmin <= Rational::from_integer(0) {
                    Err("cmin must be positive".into())
                } else if state.contract(oracle).is_none() {
                    Err(format!("oracle {oracle} missing"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Adds a contract to `state` and runs its constructor checks.
pub fn deploy(state: &mut BlockchainState, id: AccountId, instance: ContractInstance) -> Result<(), ModelError> {
    let kind = instance.kind.clone();
    state.insert_contract(id.clone(), instance)?;
    if let Err(reason) = kind.check_constructor(&id, state) {
        state.remove_contract(&id);
        return Err(ModelError::Constructor { contract: id, reason });
    }
    Ok(())
}

pub(crate) fn dispatch(kind: &ContractKind, frame: &mut Frame<'_>, function: &str, args: &[Value]) -> Step<Option<Value>> {
    match kind {
        ContractKind::Airdrop { token } => simple::airdrop(frame, token, function, args),
        ContractKind::FeeManager { .. } => simple::fee_manager(frame, function, args),
        ContractKind::AirdropFee { token, fee_manager } => simple::airdrop_fee(frame, token, fee_manager, function, args),
        ContractKind::Doubler { token } => simple::doubler(frame, token, function, args),
        ContractKind::Exchange { tin, tout, .. } => exchange::dispatch(frame, tin, tout, function, args),
        ContractKind::Amm { t0, t1 } => amm::dispatch(frame, t0, t1, function, args),
        ContractKind::Bet { oracle, native, deadline, rate, owner, .. } => {
            let bet = bet::BetParams { oracle, native, deadline: *deadline, rate, owner };
            bet::dispatch(frame, &bet, function, args)
        }
        ContractKind::Lp { oracle, cmin } => lp::dispatch(frame, oracle, cmin, function, args),
        ContractKind::Fixture(script) => fixture::dispatch(frame, script, function, args),
    }
}

pub(crate) fn arity(args: &[Value], n: usize) -> Step<()> {
    if args.len() == n {
        Ok(())
    } else {
        revert(format!("expected {n} arguments, got {}", args.len()))
    }
}

pub(crate) fn arg_amount(args: &[Value], i: usize) -> Step<Amount> {
    match args.get(i).and_then(Value::as_amount) {
        Some(a) => Ok(a),
        None => revert(format!("argument {i} is not a token amount")),
    }
}

pub(crate) fn arg_int(args: &[Value], i: usize) -> Step<i128> {
    match args.get(i).and_then(Value::as_int) {
        Some(a) => Ok(a),
        None => revert(format!("argument {i} is not an integer")),
    }
}

pub(crate) fn arg_rational(args: &[Value], i: usize) -> Step<Rational> {
    match args.get(i).and_then(Value::as_rational) {
        Some(a) => Ok(a),
        None => revert(format!("argument {i} is not a number")),
    }
}

pub(crate) fn arg_token(args: &[Value], i: usize) -> Step<TokenId> {
    match args.get(i).and_then(Value::as_token) {
        Some(t) => Ok(t.clone()),
        None => revert(format!("argument {i} is not a token")),
    }
}

pub(crate) fn arg_account(args: &[Value], i: usize) -> Step<AccountId> {
    match args.get(i).and_then(Value::as_account) {
        Some(a) => Ok(a.clone()),
        None => revert(format!("argument {i} is not an account")),
    }
}

pub(crate) fn unknown<T>(function: &str) -> Step<T> {
    revert(format!("unknown function {function}"))
}

pub(crate) fn floor_out(r: &Rational) -> Step<Amount> {
    match crate::rational::floor_amount(r) {
        Some(a) => Ok(a),
        None => revert("negative or oversized token amount"),
    }
}
